#include "gazehmm/hmm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

namespace gazehmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

void require_obs(std::span<const double> obs) {
    if (obs.empty()) throw GazeError(ErrorCode::EmptyObservation, "observation sequence is empty");
    for (std::size_t t = 0; t < obs.size(); ++t) {
        if (!std::isfinite(obs[t])) {
            throw GazeError(ErrorCode::InvalidArgument, "non-finite observation at index " + std::to_string(t));
        }
    }
}

void normalize(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    if (s > 0.0)
        for (double& x : v) x /= s;
}

// Emission likelihoods shifted by the per-step maximum log-density so that at
// least one state is exactly 1; the shift is returned in `offset`.
void shifted_emissions(const GaussianHmm& m, double x, std::vector<double>& out, double& offset) {
    const std::size_t n = m.states();
    offset = kNegInf;
    for (std::size_t s = 0; s < n; ++s) {
        out[s] = log_gaussian(x, m.emit[s].mean, m.emit[s].var);
        offset = std::max(offset, out[s]);
    }
    for (std::size_t s = 0; s < n; ++s) out[s] = std::exp(out[s] - offset);
}

struct ForwardBackward {
    std::vector<std::vector<double>> alpha;  // normalised forward
    std::vector<std::vector<double>> beta;   // backward scaled by the same factors
    std::vector<std::vector<double>> emis;   // shifted emission likelihoods
    std::vector<double> scale;
    double loglik = 0.0;
};

ForwardBackward run_forward_backward(const GaussianHmm& m, std::span<const double> obs) {
    validate(m);
    require_obs(obs);
    const std::size_t n = m.states();
    const std::size_t T = obs.size();
    ForwardBackward fb;
    fb.alpha.assign(T, std::vector<double>(n));
    fb.beta.assign(T, std::vector<double>(n));
    fb.emis.assign(T, std::vector<double>(n));
    fb.scale.assign(T, 0.0);

    double loglik = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        double offset = 0.0;
        shifted_emissions(m, obs[t], fb.emis[t], offset);
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double prior = 0.0;
            if (t == 0) {
                prior = m.pi[j];
            } else {
                for (std::size_t i = 0; i < n; ++i) prior += fb.alpha[t - 1][i] * m.trans[i][j];
            }
            fb.alpha[t][j] = prior * fb.emis[t][j];
            c += fb.alpha[t][j];
        }
        if (!(c > 0.0)) {
            throw GazeError(ErrorCode::NumericalUnderflow,
                            "forward mass vanished at sample index " + std::to_string(t));
        }
        for (double& a : fb.alpha[t]) a /= c;
        fb.scale[t] = c;
        loglik += std::log(c) + offset;
    }
    fb.loglik = loglik;

    std::fill(fb.beta[T - 1].begin(), fb.beta[T - 1].end(), 1.0);
    for (std::size_t t = T - 1; t-- > 0;) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += m.trans[i][j] * fb.emis[t + 1][j] * fb.beta[t + 1][j];
            fb.beta[t][i] = s / fb.scale[t + 1];
        }
    }
    return fb;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void validate(const GaussianHmm& m) {
    const std::size_t n = m.pi.size();
    if (n == 0) throw GazeError(ErrorCode::InvalidModel, "model has no states");
    if (m.trans.size() != n || m.emit.size() != n) {
        throw GazeError(ErrorCode::InvalidModel, "model dimensions disagree");
    }
    auto check_row = [](const std::vector<double>& row, const char* what) {
        double s = 0.0;
        for (double p : row) {
            if (!(p >= 0.0) || !std::isfinite(p)) {
                throw GazeError(ErrorCode::InvalidModel, std::string(what) + " has a negative or non-finite entry");
            }
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw GazeError(ErrorCode::InvalidModel, std::string(what) + " does not sum to 1");
    };
    check_row(m.pi, "pi");
    for (const auto& row : m.trans) {
        if (row.size() != n) throw GazeError(ErrorCode::InvalidModel, "transition matrix is not square");
        check_row(row, "transition row");
    }
    for (const auto& e : m.emit) {
        if (!std::isfinite(e.mean) || !(e.var > 0.0) || !std::isfinite(e.var)) {
            throw GazeError(ErrorCode::InvalidModel, "emission needs finite mean and positive variance");
        }
    }
}

double log_gaussian(double x, double mean, double var) noexcept {
    const double d = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

double percentile(std::span<const double> values, double pct) {
    if (values.empty()) throw GazeError(ErrorCode::EmptyObservation, "percentile of empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

GaussianHmm initial_model(std::span<const double> obs, std::span<const double> percentiles, double stay,
                          double variance_floor) {
    require_obs(obs);
    const std::size_t n = percentiles.size();
    if (n == 0) throw GazeError(ErrorCode::InvalidArgument, "initial model needs at least one state");
    if (!(stay > 0.0 && stay <= 1.0)) throw GazeError(ErrorCode::InvalidArgument, "self-transition must be in (0, 1]");
    double mean = 0.0;
    for (double x : obs) mean += x;
    mean /= static_cast<double>(obs.size());
    double var = 0.0;
    for (double x : obs) var += (x - mean) * (x - mean);
    var = std::max(var / static_cast<double>(obs.size()), variance_floor);

    GaussianHmm m;
    m.pi.assign(n, 1.0 / static_cast<double>(n));
    m.trans.assign(n, std::vector<double>(n, n > 1 ? (1.0 - stay) / static_cast<double>(n - 1) : 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (n > 1) m.trans[i][i] = stay;
        m.emit.push_back({percentile(obs, percentiles[i]), var});
    }
    return m;
}

ViterbiResult viterbi(const GaussianHmm& m, std::span<const double> obs) {
    validate(m);
    require_obs(obs);
    const std::size_t n = m.states();
    const std::size_t T = obs.size();
    std::vector<std::vector<double>> log_trans(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) log_trans[i][j] = safe_log(m.trans[i][j]);

    std::vector<double> delta(n), next(n);
    std::vector<std::vector<std::size_t>> back(T, std::vector<std::size_t>(n, 0));
    for (std::size_t s = 0; s < n; ++s) delta[s] = safe_log(m.pi[s]) + log_gaussian(obs[0], m.emit[s].mean, m.emit[s].var);
    for (std::size_t t = 1; t < T; ++t) {
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t arg = 0;
            double best = delta[0] + log_trans[0][j];
            for (std::size_t i = 1; i < n; ++i) {
                const double v = delta[i] + log_trans[i][j];
                if (v > best) {
                    best = v;
                    arg = i;
                }
            }
            back[t][j] = arg;
            next[j] = best + log_gaussian(obs[t], m.emit[j].mean, m.emit[j].var);
        }
        delta.swap(next);
    }
    ViterbiResult r;
    r.path.assign(T, 0);
    std::size_t last = 0;
    for (std::size_t s = 1; s < n; ++s)
        if (delta[s] > delta[last]) last = s;
    r.log_prob = delta[last];
    r.path[T - 1] = last;
    for (std::size_t t = T - 1; t > 0; --t) r.path[t - 1] = back[t][r.path[t]];
    return r;
}

Posterior forward_backward(const GaussianHmm& m, std::span<const double> obs) {
    const auto fb = run_forward_backward(m, obs);
    Posterior post;
    post.loglik = fb.loglik;
    post.gamma.resize(obs.size());
    for (std::size_t t = 0; t < obs.size(); ++t) {
        post.gamma[t].resize(m.states());
        for (std::size_t s = 0; s < m.states(); ++s) post.gamma[t][s] = fb.alpha[t][s] * fb.beta[t][s];
        normalize(post.gamma[t]);
    }
    return post;
}

StepResult baum_welch_step(const GaussianHmm& m, std::span<const double> obs, double variance_floor) {
    if (obs.size() < 2) throw GazeError(ErrorCode::TooShort, "Baum-Welch needs at least 2 observations");
    const auto fb = run_forward_backward(m, obs);
    const std::size_t n = m.states();
    const std::size_t T = obs.size();

    std::vector<double> occupancy(n, 0.0);      // sum of gamma over all t
    std::vector<double> departures(n, 0.0);     // sum of gamma over t < T-1
    std::vector<double> weighted(n, 0.0);       // sum of gamma * obs
    std::vector<std::vector<double>> xi_sum(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> gamma(T, std::vector<double>(n));

    for (std::size_t t = 0; t < T; ++t) {
        auto& g = gamma[t];
        for (std::size_t s = 0; s < n; ++s) g[s] = fb.alpha[t][s] * fb.beta[t][s];
        normalize(g);
        for (std::size_t s = 0; s < n; ++s) {
            occupancy[s] += g[s];
            weighted[s] += g[s] * obs[t];
            if (t + 1 < T) departures[s] += g[s];
        }
        if (t + 1 < T) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    xi_sum[i][j] += fb.alpha[t][i] * m.trans[i][j] * fb.emis[t + 1][j] * fb.beta[t + 1][j] /
                                    fb.scale[t + 1];
                }
            }
        }
    }

    StepResult r;
    r.loglik = fb.loglik;
    r.model = m;
    r.model.pi = gamma[0];
    normalize(r.model.pi);
    for (std::size_t s = 0; s < n; ++s) {
        if (occupancy[s] < 1e-12) {
            r.starved.push_back(s);
            continue;
        }
        const double mu = weighted[s] / occupancy[s];
        double var = 0.0;
        for (std::size_t t = 0; t < T; ++t) var += gamma[t][s] * (obs[t] - mu) * (obs[t] - mu);
        r.model.emit[s] = {mu, std::max(var / occupancy[s], variance_floor)};
        if (departures[s] >= 1e-12) {
            r.model.trans[s] = xi_sum[s];
            normalize(r.model.trans[s]);
        }
    }
    return r;
}

FitResult fit(const GaussianHmm& model, std::span<const double> obs, std::size_t epochs, double variance_floor) {
    if (epochs < 1) throw GazeError(ErrorCode::InvalidArgument, "fit needs at least one epoch");
    FitResult r;
    r.model = model;
    for (std::size_t e = 0; e < epochs; ++e) {
        auto step = baum_welch_step(r.model, obs, variance_floor);
        r.loglik_trace.push_back(step.loglik);
        r.starved.insert(r.starved.end(), step.starved.begin(), step.starved.end());
        r.model = std::move(step.model);
    }
    std::sort(r.starved.begin(), r.starved.end());
    r.starved.erase(std::unique(r.starved.begin(), r.starved.end()), r.starved.end());
    auto decoded = viterbi(r.model, obs);
    r.path = std::move(decoded.path);
    r.path_log_prob = decoded.log_prob;
    return r;
}

void write_model(std::ostream& out, const GaussianHmm& m) {
    const std::size_t n = m.states();
    out << "n=" << n << '\n';
    for (std::size_t i = 0; i < n; ++i) out << "pi." << i << '=' << fmt_double(m.pi[i]) << '\n';
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out << "A." << i << '.' << j << '=' << fmt_double(m.trans[i][j]) << '\n';
    for (std::size_t s = 0; s < n; ++s) out << "mu." << s << '=' << fmt_double(m.emit[s].mean) << '\n';
    for (std::size_t s = 0; s < n; ++s) out << "var." << s << '=' << fmt_double(m.emit[s].var) << '\n';
}

GaussianHmm read_model(std::istream& in) {
    std::map<std::string, double> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw GazeError(ErrorCode::InvalidModel, "model line without '=': " + line);
        double v = 0.0;
        const std::string value = line.substr(eq + 1);
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw GazeError(ErrorCode::InvalidModel, "bad model value: " + line);
        }
        kv[line.substr(0, eq)] = v;
    }
    auto get = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw GazeError(ErrorCode::InvalidModel, "model is missing key " + key);
        return it->second;
    };
    const auto n = static_cast<std::size_t>(get("n"));
    GaussianHmm m;
    m.pi.resize(n);
    m.trans.assign(n, std::vector<double>(n));
    m.emit.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.pi[i] = get("pi." + std::to_string(i));
        for (std::size_t j = 0; j < n; ++j) m.trans[i][j] = get("A." + std::to_string(i) + '.' + std::to_string(j));
        m.emit[i] = {get("mu." + std::to_string(i)), get("var." + std::to_string(i))};
    }
    validate(m);
    return m;
}

}  // namespace gazehmm
