#pragma once
// ML and list-sphere detection over finite candidate sets, plus max-log
// bit LLR extraction with optional prior feedback.
#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mimosim/modulation.hpp"

namespace mimo {

// A finite set of transmit candidates. When `cartesian` is set the candidates
// factor as vectors[l] = scale * mix * z(l) with z drawn per component from
// `axis` (component j = label bits [j*k, (j+1)*k) MSB first), which enables
// sphere enumeration; otherwise only the exhaustive paths apply.
struct CandidateSet {
    std::vector<Eigen::VectorXcd> vectors;  // index == label
    int bits = 0;
    bool cartesian = false;
    Eigen::MatrixXcd mix;   // d x n_active
    Constellation axis;
    double scale = 1.0;
    int n_active = 0;
};

CandidateSet candidate_set_from_alphabet(const VectorAlphabet& a);
CandidateSet candidate_set_stc(const std::string& stc_id, const Constellation& c);

// y = h_eff * x + w with w ~ CN(0, I); h_eff already contains sqrt(gamma).
// priors, when present, hold one LLR per label bit (positive favors bit 1).
struct DetectionProblem {
    Eigen::VectorXcd y;
    Eigen::MatrixXcd h_eff;
    const CandidateSet* cands = nullptr;
    const double* priors = nullptr;
};

struct CandidateList {
    struct Entry {
        int label = 0;
        double metric = 0.0;  // ||y - h_eff x||^2
    };
    std::vector<Entry> entries;  // ascending (metric, label)
};

double candidate_metric(const DetectionProblem& p, int label);

// Exhaustive argmin of the channel metric; ties break toward the lowest label.
int ml_detect(const DetectionProblem& p);

// The `capacity` candidates closest to y. Uses Schnorr-Euchner enumeration for
// cartesian sets and an exhaustive scan otherwise; both return identical lists.
// Priors never affect the search, only the LLR stage.
CandidateList sphere_list(const DetectionProblem& p, int capacity);

// Max-log LLRs from a candidate list: llr_b = min cost over entries with
// bit b = 0 minus min cost over entries with bit b = 1, where
// cost = metric - sum of priors over the entry's one-bits. Positive favors
// bit 1. Saturates at +-saturation when a side is empty (or beyond it).
std::vector<double> soft_llr(const DetectionProblem& p, const CandidateList& list,
                             double saturation = 40.0);

}  // namespace mimo
