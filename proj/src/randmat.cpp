#include "mimosim/randmat.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mimo {

namespace {
MatrixXcd gaussian_matrix(int rows, int cols, Rng& rng) {
    MatrixXcd g(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) g(i, j) = rng.cgaussian();
    return g;
}
}  // namespace

MatrixXcd sample_haar_unitary(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_haar_unitary: n must be >= 1");
    const MatrixXcd g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(n, n);
    const MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Normalize the R diagonal phases; without this the QR output is not Haar.
    for (int j = 0; j < n; ++j) {
        const std::complex<double> d = r(j, j);
        const double mag = std::abs(d);
        const std::complex<double> phase = mag > 0.0 ? d / mag : std::complex<double>(1.0, 0.0);
        q.col(j) *= phase;
    }
    return q;
}

ChannelRealization sample_channel(int n_tx, int n_rx, Rng& rng) {
    if (n_tx < 1 || n_rx < 1)
        throw std::invalid_argument("sample_channel: antenna counts must be >= 1");
    ChannelRealization ch;
    ch.n_tx = n_tx;
    ch.n_rx = n_rx;
    ch.h = gaussian_matrix(n_rx, n_tx, rng);
    Eigen::JacobiSVD<MatrixXcd> svd(ch.h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ch.u = svd.matrixU();
    ch.v = svd.matrixV();
    ch.sigma = svd.singularValues();
    return ch;
}

FadingGains normalized_fading_gains(const ChannelRealization& ch, double gamma) {
    if (!(gamma > 1.0))
        throw std::invalid_argument("normalized_fading_gains: gamma must exceed 1");
    const double log_gamma = std::log(gamma);
    FadingGains g;
    g.gamma = gamma;
    g.alpha.resize(ch.sigma.size());
    g.is_inf.assign(ch.sigma.size(), false);
    for (Eigen::Index i = 0; i < ch.sigma.size(); ++i) {
        const double s2 = ch.sigma[i] * ch.sigma[i];
        if (s2 == 0.0) {
            g.alpha[i] = std::numeric_limits<double>::infinity();
            g.is_inf[i] = true;
        } else {
            g.alpha[i] = -std::log(s2) / log_gamma;
        }
    }
    return g;
}

EffectiveChannel reduce_channel(const ChannelRealization& ch) {
    EffectiveChannel eff;
    eff.n_streams = static_cast<int>(ch.sigma.size());
    eff.sigma = ch.sigma;
    eff.v = ch.v;
    return eff;
}

void validate_channel(const ChannelRealization& ch, double tol) {
    const int mn = std::min(ch.n_tx, ch.n_rx);
    if (ch.sigma.size() != mn) throw std::runtime_error("validate_channel: sigma length");
    for (int i = 0; i < mn; ++i) {
        if (!(ch.sigma[i] >= 0.0)) throw std::runtime_error("validate_channel: negative sigma");
        if (i + 1 < mn && ch.sigma[i] < ch.sigma[i + 1])
            throw std::runtime_error("validate_channel: sigma not descending");
    }
    const MatrixXcd iu = ch.u.adjoint() * ch.u - MatrixXcd::Identity(ch.n_rx, ch.n_rx);
    const MatrixXcd iv = ch.v.adjoint() * ch.v - MatrixXcd::Identity(ch.n_tx, ch.n_tx);
    if (iu.cwiseAbs().maxCoeff() > tol) throw std::runtime_error("validate_channel: U not unitary");
    if (iv.cwiseAbs().maxCoeff() > tol) throw std::runtime_error("validate_channel: V not unitary");
    MatrixXcd sig = MatrixXcd::Zero(ch.n_rx, ch.n_tx);
    for (int i = 0; i < mn; ++i) sig(i, i) = ch.sigma[i];
    const MatrixXcd recon = ch.u * sig * ch.v.adjoint();
    if ((recon - ch.h).cwiseAbs().maxCoeff() > tol)
        throw std::runtime_error("validate_channel: H != U S V^H");
}

}  // namespace mimo
