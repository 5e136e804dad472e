#include "adagrid/svc.hpp"

#include "adagrid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace adagrid {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

double kernel(const UnitPoint& a, const UnitPoint& b, double gamma) {
    return std::exp(-gamma * sq_dist(a.coords(), b.coords()));
}

struct DualSolution {
    std::vector<double> alpha;
    bool converged = false;
    std::uint64_t iterations = 0;
};

// Hard-margin dual on the given kernel matrix (row-major, n x n) and labels.
// Working-set selection follows the maximal-violation / second-order rule.
DualSolution solve_dual(const std::vector<double>& K, const std::vector<double>& y, const SvcOptions& opt) {
    const std::size_t n = y.size();
    constexpr double tau = 1e-12;
    DualSolution sol;
    sol.alpha.assign(n, 0.0);
    std::vector<double> G(n, -1.0);  // gradient of the dual objective
    auto& a = sol.alpha;

    while (sol.iterations < opt.max_iterations) {
        // i: maximal -y_t G_t over I_up.
        std::size_t i = n;
        double gmax = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool up = y[t] > 0 || a[t] > 0.0;
            if (up && -y[t] * G[t] > gmax) {
                gmax = -y[t] * G[t];
                i = t;
            }
        }
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool low = y[t] < 0 || a[t] > 0.0;
            if (!low) continue;
            const double v = -y[t] * G[t];
            gmin = std::min(gmin, v);
            if (i == n) continue;
            const double b = gmax - v;
            if (b > 0.0) {
                double quad = K[i * n + i] + K[t * n + t] - 2.0 * K[i * n + t];
                if (quad <= 0.0) quad = tau;
                const double score = -(b * b) / quad;
                if (score < best) {
                    best = score;
                    j = t;
                }
            }
        }
        if (i == n || j == n || gmax - gmin < opt.tolerance) {
            sol.converged = true;
            break;
        }
        ++sol.iterations;

        const double ai = a[i], aj = a[j];
        double quad = K[i * n + i] + K[j * n + j] - 2.0 * K[i * n + j];
        if (quad <= 0.0) quad = tau;
        if (y[i] != y[j]) {
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if (a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = -diff;
            }
        } else {
            const double delta = (G[i] - G[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = sum;
            } else if (a[j] < 0.0) {
                a[j] = 0.0;
                a[i] = sum;
            }
        }
        const double di = a[i] - ai, dj = a[j] - aj;
        for (std::size_t t = 0; t < n; ++t) {
            G[t] += y[t] * (y[i] * K[t * n + i] * di + y[j] * K[t * n + j] * dj);
        }
    }

    // Absorb accumulated rounding in the equality constraint into the largest
    // alpha of the class with the larger mass.
    double pos = 0.0, neg = 0.0;
    for (std::size_t t = 0; t < n; ++t) (y[t] > 0 ? pos : neg) += a[t];
    const double drift = pos - neg;
    if (drift != 0.0) {
        const double sign = drift > 0 ? 1.0 : -1.0;
        std::size_t k = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == sign && (k == n || a[t] > a[k])) k = t;
        }
        if (k != n) a[k] = std::max(0.0, a[k] - std::abs(drift));
    }
    return sol;
}

std::vector<double> kernel_matrix(const std::vector<LabeledPoint>& data, double gamma) {
    const std::size_t n = data.size();
    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        K[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = kernel(data[i].point, data[j].point, gamma);
            K[i * n + j] = v;
            K[j * n + i] = v;
        }
    }
    return K;
}

std::size_t count_label(const std::vector<LabeledPoint>& data, Label l) {
    return static_cast<std::size_t>(
        std::count_if(data.begin(), data.end(), [l](const LabeledPoint& p) { return p.label == l; }));
}

SvcModel fit_with_kernel(const std::vector<LabeledPoint>& data, const std::vector<double>& K, double gamma,
                         const SvcOptions& opt) {
    std::vector<double> y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) y[i] = to_int(data[i].label);
    auto sol = solve_dual(K, y, opt);

    SvcModel m;
    m.kind = SvcModel::Kind::Kernel;
    m.gamma = gamma;
    m.points = data;
    m.alphas = std::move(sol.alpha);
    m.converged = sol.converged;
    m.iterations = sol.iterations;
    m.bias = recompute_bias(m.points, m.alphas, gamma);
    return m;
}

}  // namespace

double SvcModel::decision(const UnitPoint& x) const {
    if (kind == Kind::Majority) return to_int(majority);
    double s = bias;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (alphas[i] > 0.0) s += alphas[i] * to_int(points[i].label) * kernel(x, points[i].point, gamma);
    }
    return s;
}

Label SvcModel::predict(const UnitPoint& x) const {
    if (kind == Kind::Majority) return majority;
    return decision(x) >= 0.0 ? Label::Positive : Label::Negative;
}

double SvcModel::probability_from_decision(double s) const {
    if (kind == Kind::Majority) return majority == Label::Positive ? 1.0 : 0.0;
    if (!platt) throw UsageError("model has no probability calibration");
    const double z = platt->a * s + platt->b;
    // Numerically stable 1 / (1 + exp(z)).
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

double SvcModel::probability(const UnitPoint& x) const { return probability_from_decision(decision(x)); }

std::size_t SvcModel::support_count() const {
    return static_cast<std::size_t>(std::count_if(alphas.begin(), alphas.end(), [](double a) { return a > 0.0; }));
}

double recompute_bias(const std::vector<LabeledPoint>& data, const std::vector<double>& alphas, double gamma) {
    if (data.size() != alphas.size()) throw UsageError("recompute_bias: size mismatch");
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!(alphas[i] > 0.0)) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (alphas[j] > 0.0) s += alphas[j] * to_int(data[j].label) * kernel(data[i].point, data[j].point, gamma);
        }
        total += to_int(data[i].label) - s;
        ++count;
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

double dual_objective(const std::vector<LabeledPoint>& data, const std::vector<double>& alphas, double gamma) {
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        lin += alphas[i];
        if (alphas[i] == 0.0) continue;
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (alphas[j] == 0.0) continue;
            quad += alphas[i] * alphas[j] * to_int(data[i].label) * to_int(data[j].label) *
                    kernel(data[i].point, data[j].point, gamma);
        }
    }
    return 0.5 * quad - lin;
}

SvcModel svc_fit(const std::vector<LabeledPoint>& data, double gamma, const SvcOptions& opt) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw UsageError("svc_fit: gamma must be positive");
    if (count_label(data, Label::Negative) == 0 || count_label(data, Label::Positive) == 0) {
        throw UsageError("svc_fit: training data has a single class; use the majority fallback");
    }
    return fit_with_kernel(data, kernel_matrix(data, gamma), gamma, opt);
}

SvcModel majority_model(const std::vector<LabeledPoint>& data) {
    SvcModel m;
    m.kind = SvcModel::Kind::Majority;
    m.majority =
        count_label(data, Label::Negative) > count_label(data, Label::Positive) ? Label::Negative : Label::Positive;
    return m;
}

std::vector<double> default_gamma_grid(std::size_t p) {
    std::vector<double> g;
    for (int k = -6; k <= 6; ++k) g.push_back(std::ldexp(1.0, k) / static_cast<double>(p));
    return g;
}

GammaSelection select_gamma_cv(const std::vector<LabeledPoint>& data, const std::vector<double>& grid,
                               std::size_t folds, std::uint64_t seed, const SvcOptions& opt) {
    if (grid.empty()) throw UsageError("select_gamma_cv: empty gamma grid");
    if (folds < 2) throw UsageError("select_gamma_cv: need at least 2 folds");
    GammaSelection sel;
    if (count_label(data, Label::Negative) < kMinPerClass || count_label(data, Label::Positive) < kMinPerClass) {
        return sel;
    }
    if (grid.size() == 1) {
        sel.gamma = grid.front();
        return sel;
    }

    // Stratified fold assignment: shuffle each class, then deal round-robin.
    Rng rng(seed);
    std::vector<std::size_t> fold_of(data.size());
    std::size_t dealt = 0;
    for (Label l : {Label::Negative, Label::Positive}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data[i].label == l) idx.push_back(i);
        }
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
        for (std::size_t i : idx) fold_of[i] = dealt++ % folds;
    }

    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    std::size_t best_err = std::numeric_limits<std::size_t>::max();
    for (double gamma : sorted) {
        const auto K = kernel_matrix(data, gamma);
        std::size_t errors = 0;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<std::size_t> train, test;
            for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? test : train).push_back(i);
            if (test.empty()) continue;
            std::vector<LabeledPoint> tr;
            std::vector<double> Ktr(train.size() * train.size());
            for (std::size_t a = 0; a < train.size(); ++a) {
                tr.push_back(data[train[a]]);
                for (std::size_t b = 0; b < train.size(); ++b) {
                    Ktr[a * train.size() + b] = K[train[a] * data.size() + train[b]];
                }
            }
            SvcModel m = fit_with_kernel(tr, Ktr, gamma, opt);
            for (std::size_t i : test) {
                if (m.predict(data[i].point) != data[i].label) ++errors;
            }
        }
        sel.cv_errors.push_back(errors);
        if (errors < best_err) {
            best_err = errors;
            sel.gamma = gamma;
        }
    }
    return sel;
}

SvcModel fit_tuned(const std::vector<LabeledPoint>& data, std::uint64_t seed, const SvcOptions& opt) {
    if (data.empty()) return majority_model(data);
    const auto sel = select_gamma_cv(data, default_gamma_grid(data.front().point.dimension()), 5, seed, opt);
    if (!sel.gamma) return majority_model(data);
    return svc_fit(data, *sel.gamma, opt);
}

void platt_calibrate(SvcModel& model, const std::vector<LabeledPoint>& data) {
    if (model.kind == SvcModel::Kind::Majority) return;
    const std::size_t n = data.size();
    std::vector<double> s(n), t(n);
    double prior1 = 0.0, prior0 = 0.0;
    for (const auto& d : data) (d.label == Label::Positive ? prior1 : prior0) += 1.0;
    if (prior1 == 0.0 || prior0 == 0.0) throw UsageError("platt_calibrate: both classes required");
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = model.decision(data[i].point);
        t[i] = data[i].label == Label::Positive ? hi : lo;
    }

    constexpr double kCap = 50.0;
    constexpr double sigma = 1e-12;
    constexpr double eps = 1e-8;
    constexpr double min_step = 1e-10;
    auto loss = [&](double A, double B) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = s[i] * A + B;
            f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
        }
        return f;
    };

    double A = 0.0, B = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = loss(A, B);
    for (int it = 0; it < 100; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = s[i] * A + B;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += s[i] * s[i] * d2;
            h22 += d2;
            h21 += s[i] * d2;
            const double d1 = t[i] - p;
            g1 += s[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;
        const double det = h11 * h22 - h21 * h21;
        const double dA = -(h22 * g1 - h21 * g2) / det;
        const double dB = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * dA + g2 * dB;
        double step = 1.0;
        bool moved = false;
        while (step >= min_step) {
            const double nA = std::clamp(A + step * dA, -kCap, kCap);
            const double nB = B + step * dB;
            const double nf = loss(nA, nB);
            if (nf < fval + 1e-4 * step * gd) {
                moved = nA != A || nB != B;
                A = nA;
                B = nB;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (!moved) break;
    }
    model.platt = PlattParams{A, B};
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

nlohmann::json to_json(const SvcModel& m) {
    nlohmann::json j;
    if (m.kind == SvcModel::Kind::Majority) {
        j["kind"] = "majority";
        j["label"] = to_int(m.majority);
        return j;
    }
    j["kind"] = "kernel";
    j["gamma"] = m.gamma;
    j["bias"] = m.bias;
    nlohmann::json pts = nlohmann::json::array();
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& p : m.points) {
        pts.push_back(p.point.vec());
        labels.push_back(to_int(p.label));
    }
    j["points"] = pts;
    j["labels"] = labels;
    j["alphas"] = m.alphas;
    j["converged"] = m.converged;
    if (m.platt) j["platt"] = {{"a", m.platt->a}, {"b", m.platt->b}};
    return j;
}

SvcModel svc_from_json(const nlohmann::json& j) {
    try {
        SvcModel m;
        if (j.at("kind") == "majority") {
            m.kind = SvcModel::Kind::Majority;
            m.majority = label_from_int(j.at("label").get<long long>());
            return m;
        }
        m.kind = SvcModel::Kind::Kernel;
        m.gamma = j.at("gamma").get<double>();
        m.bias = j.at("bias").get<double>();
        const auto& pts = j.at("points");
        const auto& labels = j.at("labels");
        if (pts.size() != labels.size()) throw UsageError("svc JSON: points/labels length mismatch");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            m.points.push_back({UnitPoint(pts[i].get<std::vector<double>>()),
                                label_from_int(labels[i].get<long long>())});
        }
        m.alphas = j.at("alphas").get<std::vector<double>>();
        if (m.alphas.size() != m.points.size()) throw UsageError("svc JSON: alphas length mismatch");
        m.converged = j.value("converged", true);
        if (j.contains("platt")) m.platt = PlattParams{j["platt"].at("a").get<double>(), j["platt"].at("b").get<double>()};
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed SVC JSON: ") + e.what());
    }
}

}  // namespace adagrid
