#pragma once
// Random channel and unitary sampling for quasi-static Rayleigh MIMO links.
#include <Eigen/Dense>

#include <vector>

#include "mimosim/rng.hpp"

namespace mimo {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// H = U * diag(sigma) * V^H with sigma sorted descending.
struct ChannelRealization {
    int n_tx = 0;
    int n_rx = 0;
    MatrixXcd h;      // n_rx x n_tx, i.i.d. CN(0,1)
    MatrixXcd u;      // n_rx x n_rx unitary
    VectorXd sigma;   // min(n_tx, n_rx) singular values, descending, >= 0
    MatrixXcd v;      // n_tx x n_tx unitary
};

// alpha_i = -log(sigma_i^2) / log(gamma), index order inherited from sigma.
// A zero singular value maps to +infinity and is flagged.
struct FadingGains {
    VectorXd alpha;
    std::vector<bool> is_inf;
    double gamma = 0.0;
};

// Equivalent diagonalized system: y = sqrt(gamma) * diag(sigma) * rows(V^H x) + w,
// keeping the min(n_tx, n_rx) received streams that carry signal.
struct EffectiveChannel {
    VectorXd sigma;   // length n_streams, descending
    MatrixXcd v;      // n_tx x n_tx right singular factor of H
    int n_streams = 0;
};

// Haar-distributed n x n unitary: QR of an i.i.d. complex Gaussian matrix with
// the R diagonal phases folded into Q.
MatrixXcd sample_haar_unitary(int n, Rng& rng);

ChannelRealization sample_channel(int n_tx, int n_rx, Rng& rng);

FadingGains normalized_fading_gains(const ChannelRealization& ch, double gamma);

EffectiveChannel reduce_channel(const ChannelRealization& ch);

// Throws std::runtime_error when reconstruction, unitarity or ordering is violated.
void validate_channel(const ChannelRealization& ch, double tol = 1e-10);

}  // namespace mimo
