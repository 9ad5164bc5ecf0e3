#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "gazehmm/error.hpp"

namespace gazehmm {

inline constexpr double kVarianceFloor = 1e-6;

struct GaussianEmission {
    double mean = 0.0;
    double var = 1.0;
};

// First-order HMM with one univariate Gaussian per state.
struct GaussianHmm {
    std::vector<double> pi;
    std::vector<std::vector<double>> trans;  // row-stochastic, trans[from][to]
    std::vector<GaussianEmission> emit;

    std::size_t states() const noexcept { return pi.size(); }
};

// Throws InvalidModel unless pi and every row of trans sum to 1 within 1e-12,
// all probabilities are non-negative and every variance is positive.
void validate(const GaussianHmm& model);

double log_gaussian(double x, double mean, double var) noexcept;

// Linear-interpolated percentile (0..100) of a non-empty sample.
double percentile(std::span<const double> values, double pct);

// Means at the given percentiles of obs, variances equal to the sample
// variance, self-transition `stay` split evenly elsewhere, uniform start.
GaussianHmm initial_model(std::span<const double> obs, std::span<const double> percentiles, double stay = 0.95,
                          double variance_floor = kVarianceFloor);

struct ViterbiResult {
    std::vector<std::size_t> path;
    double log_prob = 0.0;
};

// Log-space Viterbi; ties go to the lower state index.
ViterbiResult viterbi(const GaussianHmm& model, std::span<const double> obs);

struct Posterior {
    std::vector<std::vector<double>> gamma;  // gamma[t][state]
    double loglik = 0.0;
};

// Scaled forward-backward. Throws NumericalUnderflow naming the sample index
// if every state has zero forward mass at some step.
Posterior forward_backward(const GaussianHmm& model, std::span<const double> obs);

struct StepResult {
    GaussianHmm model;
    double loglik = 0.0;               // log-likelihood of the input model
    std::vector<std::size_t> starved;  // states whose parameters were left unchanged
};

StepResult baum_welch_step(const GaussianHmm& model, std::span<const double> obs,
                           double variance_floor = kVarianceFloor);

struct FitResult {
    GaussianHmm model;
    std::vector<std::size_t> path;
    double path_log_prob = 0.0;
    std::vector<double> loglik_trace;  // input-model log-likelihood of each EM step
    std::vector<std::size_t> starved;  // union over epochs, sorted
};

// `epochs` Baum-Welch steps followed by a Viterbi decode of the final model.
FitResult fit(const GaussianHmm& model, std::span<const double> obs, std::size_t epochs = 3,
              double variance_floor = kVarianceFloor);

// Flat key=value text: n, pi.i, A.i.j, mu.s, var.s.
void write_model(std::ostream& out, const GaussianHmm& model);
GaussianHmm read_model(std::istream& in);

}  // namespace gazehmm
