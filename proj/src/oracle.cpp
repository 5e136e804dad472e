#include "adagrid/oracle.hpp"

#include "adagrid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace adagrid {

namespace {

constexpr double kLatticeTol = 1e-12;

void require_dim(const UnitPoint& x, std::size_t p, const char* who) {
    if (x.dimension() != p) {
        throw UsageError(std::string(who) + ": expected dimension " + std::to_string(p) + ", got " +
                         std::to_string(x.dimension()));
    }
}

std::string fmt17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Index of u in sorted levels, or nullopt.
std::optional<std::size_t> find_level(const std::vector<double>& levels, double u) {
    auto it = std::lower_bound(levels.begin(), levels.end(), u - kLatticeTol);
    if (it != levels.end() && std::abs(*it - u) <= kLatticeTol) return static_cast<std::size_t>(it - levels.begin());
    return std::nullopt;
}

[[noreturn]] void throw_off_lattice(std::size_t k, double u, const std::vector<double>& levels) {
    std::ostringstream os;
    os.precision(10);
    os << "coordinate " << k + 1 << " = " << u << " is not a lawful unit value; lawful values: ";
    for (std::size_t i = 0; i < levels.size(); ++i) os << (i ? ", " : "") << levels[i];
    throw DomainError(os.str());
}

}  // namespace

bool Oracle::admits(const UnitPoint& x) const {
    const auto lat = lattice();
    if (lat.empty()) return true;
    for (std::size_t k = 0; k < lat.size() && k < x.dimension(); ++k) {
        if (!lat[k].empty() && !find_level(lat[k], x[k])) return false;
    }
    return true;
}

std::vector<std::vector<double>> transform_lattice(const Transform& t) {
    std::vector<std::vector<double>> out(t.dimension());
    bool any = false;
    for (std::size_t k = 0; k < t.dimension(); ++k) {
        out[k] = lawful_values(t.dims[k]);
        any = any || !out[k].empty();
    }
    if (!any) out.clear();
    return out;
}

// ---------------------------------------------------------------------------

double IllustrationOracle::score(double x1, double x2) {
    const double a = std::max(x1 - 0.5, 0.0);
    const double b = std::max(x2 - 0.2, 0.0);
    return x1 * x1 + x2 * x2 + 15.0 * a * a + 3.0 * std::pow(b, 0.4);
}

Label IllustrationOracle::evaluate(const UnitPoint& x) const {
    require_dim(x, 2, "illustration oracle");
    return score(x[0], x[1]) >= 2.84 ? Label::Positive : Label::Negative;
}

nlohmann::json IllustrationOracle::to_json() const { return {{"kind", "illustration"}}; }

// ---------------------------------------------------------------------------

ArctanOracle::ArctanOracle(std::size_t p, double mu) : p_(p), mu_(mu) {
    if (p == 0) throw UsageError("arctan oracle: dimension must be positive");
    if (!std::isfinite(mu)) throw UsageError("arctan oracle: mu must be finite");
}

double ArctanOracle::score(const UnitPoint& x) {
    const std::size_t p = x.dimension();
    const double denom = static_cast<double>(p + 1);
    double s = 0.0;
    for (std::size_t i = 1; i <= p; ++i) {
        s += std::atan(5.0 * static_cast<double>(p + 1 - i) * x[i - 1] / denom);
    }
    return s;
}

Label ArctanOracle::evaluate(const UnitPoint& x) const {
    require_dim(x, p_, "arctan oracle");
    return score(x) >= mu_ ? Label::Positive : Label::Negative;
}

std::string ArctanOracle::id() const { return "arctan:mu=" + fmt17(mu_); }

nlohmann::json ArctanOracle::to_json() const { return {{"kind", "arctan"}, {"p", p_}, {"mu", mu_}}; }

std::optional<std::pair<double, double>> arctan_mu_range(std::size_t p) {
    switch (p) {
        case 2: return std::pair{0.92, 2.10};
        case 3: return std::pair{1.53, 2.95};
        case 4: return std::pair{2.14, 3.75};
        case 5: return std::pair{2.76, 4.59};
        case 6: return std::pair{3.43, 5.40};
        default: return std::nullopt;
    }
}

// ---------------------------------------------------------------------------

HalfSpaceOracle::HalfSpaceOracle(std::size_t p) : HalfSpaceOracle(p, static_cast<double>(p) / 2.0) {}

HalfSpaceOracle::HalfSpaceOracle(std::size_t p, double threshold) : p_(p), threshold_(threshold) {
    if (p == 0) throw UsageError("halfspace oracle: dimension must be positive");
}

Label HalfSpaceOracle::evaluate(const UnitPoint& x) const {
    require_dim(x, p_, "halfspace oracle");
    double s = 0.0;
    for (double c : x.coords()) s += c;
    return s < threshold_ ? Label::Negative : Label::Positive;
}

std::string HalfSpaceOracle::id() const { return "halfspace:t=" + fmt17(threshold_); }

nlohmann::json HalfSpaceOracle::to_json() const {
    return {{"kind", "halfspace"}, {"p", p_}, {"threshold", threshold_}};
}

// ---------------------------------------------------------------------------

UpperFaceOracle::UpperFaceOracle(std::size_t p) : p_(p) {
    if (p == 0) throw UsageError("upper_face oracle: dimension must be positive");
}

Label UpperFaceOracle::evaluate(const UnitPoint& x) const {
    require_dim(x, p_, "upper_face oracle");
    for (double c : x.coords()) {
        if (c >= 1.0) return Label::Positive;
    }
    return Label::Negative;
}

nlohmann::json UpperFaceOracle::to_json() const { return {{"kind", "upper_face"}, {"p", p_}}; }

// ---------------------------------------------------------------------------

ConstantOracle::ConstantOracle(std::size_t p, Label label) : p_(p), label_(label) {
    if (p == 0) throw UsageError("constant oracle: dimension must be positive");
}

std::string ConstantOracle::id() const { return label_ == Label::Positive ? "constant:+1" : "constant:-1"; }

nlohmann::json ConstantOracle::to_json() const {
    return {{"kind", "constant"}, {"p", p_}, {"label", to_int(label_)}};
}

// ---------------------------------------------------------------------------

StaircaseOracle::StaircaseOracle(std::size_t p, std::size_t resolution, std::uint64_t seed)
    : p_(p), m_(resolution), seed_(seed) {
    if (p == 0) throw UsageError("staircase oracle: dimension must be positive");
    if (resolution < 2) throw UsageError("staircase oracle: resolution must be >= 2");
    Rng rng(seed);
    // Up to m + p generators; zero generators gives the constant -1 oracle.
    const std::size_t count = rng.uniform_index(m_ + p_ + 1);
    for (std::size_t g = 0; g < count; ++g) {
        std::vector<std::size_t> cell(p_);
        for (auto& c : cell) c = rng.uniform_index(m_);
        generators_.push_back(std::move(cell));
    }
}

StaircaseOracle::StaircaseOracle(std::size_t p, std::size_t resolution,
                                 std::vector<std::vector<std::size_t>> generators)
    : p_(p), m_(resolution), generators_(std::move(generators)) {
    if (p == 0) throw UsageError("staircase oracle: dimension must be positive");
    if (resolution < 2) throw UsageError("staircase oracle: resolution must be >= 2");
    for (const auto& g : generators_) {
        if (g.size() != p_) throw UsageError("staircase oracle: generator has wrong dimension");
        for (auto c : g) {
            if (c >= m_) throw UsageError("staircase oracle: generator index out of range");
        }
    }
}

Label StaircaseOracle::cell_label(const std::vector<std::size_t>& cell) const {
    for (const auto& g : generators_) {
        bool above = true;
        for (std::size_t k = 0; k < p_ && above; ++k) above = cell[k] >= g[k];
        if (above) return Label::Positive;
    }
    return Label::Negative;
}

Label StaircaseOracle::evaluate(const UnitPoint& x) const {
    require_dim(x, p_, "staircase oracle");
    std::vector<std::size_t> cell(p_);
    for (std::size_t k = 0; k < p_; ++k) {
        const auto c = static_cast<std::size_t>(std::floor(x[k] * static_cast<double>(m_)));
        cell[k] = std::min(c, m_ - 1);
    }
    return cell_label(cell);
}

std::string StaircaseOracle::id() const {
    return "staircase:m=" + std::to_string(m_) + (seed_ ? ",seed=" + std::to_string(*seed_) : std::string());
}

nlohmann::json StaircaseOracle::to_json() const {
    nlohmann::json j{{"kind", "staircase"}, {"p", p_}, {"resolution", m_}};
    if (seed_) {
        j["seed"] = *seed_;
    } else {
        j["generators"] = generators_;
    }
    return j;
}

// ---------------------------------------------------------------------------

TransformedOracle::TransformedOracle(Transform t, std::vector<double> weights, double threshold)
    : transform_(std::move(t)), weights_(std::move(weights)), threshold_(threshold) {
    validate(transform_);
    if (weights_.size() != transform_.dimension()) {
        throw UsageError("transformed oracle: need one weight per dimension");
    }
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const bool inc = transform_.dims[k].direction == Direction::Increasing;
        if ((inc && weights_[k] < 0.0) || (!inc && weights_[k] > 0.0)) {
            throw UsageError("transformed oracle: weight sign of '" + transform_.dims[k].name +
                             "' contradicts its direction");
        }
    }
}

Label TransformedOracle::evaluate(const UnitPoint& x) const {
    const auto y = apply_transform(transform_, x);
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += weights_[k] * y[k];
    return s >= threshold_ ? Label::Positive : Label::Negative;
}

nlohmann::json TransformedOracle::to_json() const {
    return {{"kind", "transformed"},
            {"transform", adagrid::to_json(transform_)},
            {"weights", weights_},
            {"threshold", threshold_}};
}

std::vector<std::vector<double>> TransformedOracle::lattice() const { return transform_lattice(transform_); }

// ---------------------------------------------------------------------------

MonotonicityAuditError::MonotonicityAuditError(const std::string& what, LabeledPoint lower, LabeledPoint upper)
    : Error(what), lower_(std::move(lower)), upper_(std::move(upper)) {}

TabularOracle::TabularOracle(Transform t, const std::vector<Row>& rows, std::string source)
    : transform_(std::move(t)), source_(std::move(source)) {
    validate(transform_);
    const std::size_t p = transform_.dimension();
    if (rows.empty()) throw UsageError("table is empty");

    // Distinct unit levels per dimension.
    unit_levels_.assign(p, {});
    std::vector<std::vector<double>> unit_rows;
    unit_rows.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.physical.size() != p) {
            throw UsageError("table row has " + std::to_string(r.physical.size()) + " coordinates, transform has " +
                             std::to_string(p));
        }
        std::vector<double> u(p);
        for (std::size_t k = 0; k < p; ++k) {
            u[k] = inverse_dimension(transform_.dims[k], r.physical[k]);
            unit_levels_[k].push_back(u[k]);
        }
        unit_rows.push_back(std::move(u));
    }
    std::size_t total = 1;
    for (auto& lv : unit_levels_) {
        std::sort(lv.begin(), lv.end());
        lv.erase(std::unique(lv.begin(), lv.end(), [](double a, double b) { return std::abs(a - b) <= kLatticeTol; }),
                 lv.end());
        total *= lv.size();
    }

    std::vector<int> filled(total, 0);
    labels_.assign(total, Label::Negative);
    std::vector<std::size_t> idx(p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < p; ++k) idx[k] = *find_level(unit_levels_[k], unit_rows[i][k]);
        const std::size_t f = flat_index(idx);
        if (filled[f] && labels_[f] != rows[i].label) {
            throw UsageError("table lists conflicting labels for the same input");
        }
        filled[f] = 1;
        labels_[f] = rows[i].label;
    }
    if (std::count(filled.begin(), filled.end(), 0) > 0) {
        throw UsageError("table is incomplete: " + std::to_string(std::count(filled.begin(), filled.end(), 0)) +
                         " of " + std::to_string(total) + " lattice combinations missing");
    }

    // Adjacent-cell audit is sufficient on a product lattice.
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t f = 0; f < total; ++f) {
        if (labels_[f] == Label::Positive) {
            for (std::size_t k = 0; k < p; ++k) {
                if (idx[k] + 1 >= unit_levels_[k].size()) continue;
                auto up = idx;
                ++up[k];
                if (labels_[flat_index(up)] == Label::Negative) {
                    std::vector<double> lo(p), hi(p);
                    for (std::size_t d = 0; d < p; ++d) {
                        lo[d] = unit_levels_[d][idx[d]];
                        hi[d] = unit_levels_[d][up[d]];
                    }
                    LabeledPoint a{UnitPoint(lo), Label::Positive};
                    LabeledPoint b{UnitPoint(hi), Label::Negative};
                    const auto pa = apply_transform(transform_, a.point);
                    const auto pb = apply_transform(transform_, b.point);
                    std::ostringstream os;
                    os.precision(10);
                    os << "monotonicity audit failed: physical (";
                    for (std::size_t d = 0; d < p; ++d) os << (d ? ", " : "") << pa[d];
                    os << ") is +1 but the dominating (";
                    for (std::size_t d = 0; d < p; ++d) os << (d ? ", " : "") << pb[d];
                    os << ") is -1";
                    throw MonotonicityAuditError(os.str(), std::move(a), std::move(b));
                }
            }
        }
        for (std::size_t k = p; k-- > 0;) {
            if (++idx[k] < unit_levels_[k].size()) break;
            idx[k] = 0;
        }
    }
}

std::size_t TabularOracle::flat_index(const std::vector<std::size_t>& idx) const {
    std::size_t f = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) f = f * unit_levels_[k].size() + idx[k];
    return f;
}

Label TabularOracle::evaluate(const UnitPoint& x) const {
    require_dim(x, dimension(), "tabular oracle");
    std::vector<std::size_t> idx(x.dimension());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        auto i = find_level(unit_levels_[k], x[k]);
        if (!i) throw_off_lattice(k, x[k], unit_levels_[k]);
        idx[k] = *i;
    }
    return labels_[flat_index(idx)];
}

nlohmann::json TabularOracle::to_json() const {
    nlohmann::json j{{"kind", "tabular"}, {"transform", adagrid::to_json(transform_)}};
    if (!source_.empty()) j["table"] = source_;
    return j;
}

std::vector<TabularOracle::Row> read_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open table '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw UsageError("table '" + path + "' has no header");
    std::size_t columns = std::count(line.begin(), line.end(), ',') + 1;
    if (columns < 2) throw UsageError("table '" + path + "' needs at least one input column and a label");
    std::vector<TabularOracle::Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw UsageError("table '" + path + "' line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (vals.size() != columns) {
            throw UsageError("table '" + path + "' line " + std::to_string(lineno) + ": expected " +
                             std::to_string(columns) + " fields");
        }
        const double lab = vals.back();
        vals.pop_back();
        if (lab != -1.0 && lab != 1.0) {
            throw UsageError("table '" + path + "' line " + std::to_string(lineno) + ": label must be -1 or 1");
        }
        rows.push_back({std::move(vals), lab > 0 ? Label::Positive : Label::Negative});
    }
    return rows;
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<TabularOracle::Row>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write table '" + path + "'");
    for (const auto& h : header) out << h << ',';
    out << "label\n";
    out.precision(17);
    for (const auto& r : rows) {
        for (double v : r.physical) out << v << ',';
        out << to_int(r.label) << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------

InteractiveOracle::InteractiveOracle(Transform t, Callback cb) : transform_(std::move(t)), cb_(std::move(cb)) {
    validate(transform_);
    if (!cb_) throw UsageError("interactive oracle needs a callback");
}

Label InteractiveOracle::evaluate(const UnitPoint& x) const { return cb_(x, apply_transform(transform_, x)); }

nlohmann::json InteractiveOracle::to_json() const {
    return {{"kind", "interactive"}, {"transform", adagrid::to_json(transform_)}};
}

std::vector<std::vector<double>> InteractiveOracle::lattice() const { return transform_lattice(transform_); }

// ---------------------------------------------------------------------------

namespace {

std::string resolve(const std::string& base, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base) / p).string();
}

Transform load_transform(const nlohmann::json& j, const std::string& base_dir) {
    if (j.is_string()) {
        const std::string path = resolve(base_dir, j.get<std::string>());
        std::ifstream in(path);
        if (!in) throw IoError("cannot open transform '" + path + "'");
        try {
            return transform_from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError("transform '" + path + "': " + e.what());
        }
    }
    if (j.is_object() && j.contains("builtin")) {
        const auto name = j.at("builtin").get<std::string>();
        if (name == "ice_breaking") return ice_breaking_transform();
        if (name == "crash_grid") return crash_grid_transform();
        if (name == "crash_inner") return crash_inner_transform();
        throw UsageError("unknown builtin transform '" + name + "'");
    }
    return transform_from_json(j);
}

}  // namespace

OraclePtr make_oracle(const nlohmann::json& spec, const std::string& base_dir) {
    try {
        const std::string kind = spec.at("kind").get<std::string>();
        if (kind == "illustration") return std::make_shared<IllustrationOracle>();
        if (kind == "arctan") {
            return std::make_shared<ArctanOracle>(spec.at("p").get<std::size_t>(), spec.at("mu").get<double>());
        }
        if (kind == "halfspace") {
            const auto p = spec.at("p").get<std::size_t>();
            if (spec.contains("threshold")) return std::make_shared<HalfSpaceOracle>(p, spec.at("threshold").get<double>());
            return std::make_shared<HalfSpaceOracle>(p);
        }
        if (kind == "upper_face") return std::make_shared<UpperFaceOracle>(spec.at("p").get<std::size_t>());
        if (kind == "constant") {
            return std::make_shared<ConstantOracle>(spec.at("p").get<std::size_t>(),
                                                    label_from_int(spec.at("label").get<long long>()));
        }
        if (kind == "staircase") {
            const auto p = spec.at("p").get<std::size_t>();
            const auto m = spec.at("resolution").get<std::size_t>();
            if (spec.contains("generators")) {
                return std::make_shared<StaircaseOracle>(
                    p, m, spec.at("generators").get<std::vector<std::vector<std::size_t>>>());
            }
            return std::make_shared<StaircaseOracle>(p, m, spec.at("seed").get<std::uint64_t>());
        }
        if (kind == "transformed") {
            return std::make_shared<TransformedOracle>(load_transform(spec.at("transform"), base_dir),
                                                       spec.at("weights").get<std::vector<double>>(),
                                                       spec.at("threshold").get<double>());
        }
        if (kind == "tabular") {
            const std::string table = resolve(base_dir, spec.at("table").get<std::string>());
            return std::make_shared<TabularOracle>(load_transform(spec.at("transform"), base_dir),
                                                   read_table_csv(table), spec.at("table").get<std::string>());
        }
        if (kind == "interactive") {
            throw UsageError("interactive oracles are answered through a design session, not evaluated directly");
        }
        throw UsageError("unknown oracle kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed oracle spec: ") + e.what());
    }
}

std::optional<std::pair<LabeledPoint, LabeledPoint>> audit_monotone(const Oracle& oracle, std::size_t pairs,
                                                                    std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t p = oracle.dimension();
    const auto lat = oracle.lattice();
    std::vector<double> lo(p), hi(p);
    for (std::size_t s = 0; s < pairs; ++s) {
        for (std::size_t k = 0; k < p; ++k) {
            if (!lat.empty() && !lat[k].empty()) {
                std::size_t i = rng.uniform_index(lat[k].size());
                std::size_t j = rng.uniform_index(lat[k].size());
                if (i > j) std::swap(i, j);
                lo[k] = lat[k][i];
                hi[k] = lat[k][j];
            } else {
                const double a = rng.uniform01();
                const double b = rng.uniform01();
                lo[k] = std::min(a, b);
                hi[k] = std::max(a, b);
            }
        }
        UnitPoint x(lo), y(hi);
        const Label fx = oracle.evaluate(x);
        const Label fy = oracle.evaluate(y);
        if (fx == Label::Positive && fy == Label::Negative) {
            return std::pair{LabeledPoint{x, fx}, LabeledPoint{y, fy}};
        }
    }
    return std::nullopt;
}

}  // namespace adagrid
