#pragma once

#include "adagrid/core.hpp"
#include "adagrid/transform.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace adagrid {

/// A deterministic, monotone non-decreasing binary function on [0,1]^p.
class Oracle {
public:
    virtual ~Oracle() = default;

    virtual std::size_t dimension() const = 0;
    virtual Label evaluate(const UnitPoint& x) const = 0;

    /// Short identifier used in result tables.
    virtual std::string id() const = 0;

    /// Serializable description that make_oracle() accepts.
    virtual nlohmann::json to_json() const = 0;

    /// Per-dimension unit values where the oracle is defined. Empty when the
    /// oracle accepts any point of the cube.
    virtual std::vector<std::vector<double>> lattice() const { return {}; }

    /// True if x lies on the lattice (always true for continuous oracles).
    bool admits(const UnitPoint& x) const;
};

using OraclePtr = std::shared_ptr<const Oracle>;

/// Two-dimensional illustration: +1 iff
/// x1^2 + x2^2 + 15((x1-0.5)+)^2 + 3((x2-0.2)+)^0.4 >= 2.84.
class IllustrationOracle final : public Oracle {
public:
    std::size_t dimension() const override { return 2; }
    Label evaluate(const UnitPoint& x) const override;
    std::string id() const override { return "illustration"; }
    nlohmann::json to_json() const override;

    static double score(double x1, double x2);
};

/// +1 iff sum_i arctan(5(p+1-i) x_i / (p+1)) >= mu.
class ArctanOracle final : public Oracle {
public:
    ArctanOracle(std::size_t p, double mu);

    std::size_t dimension() const override { return p_; }
    Label evaluate(const UnitPoint& x) const override;
    std::string id() const override;
    nlohmann::json to_json() const override;

    double mu() const { return mu_; }
    static double score(const UnitPoint& x);

private:
    std::size_t p_;
    double mu_;
};

/// Calibrated mu interval for the arctan family (p = 2..6).
std::optional<std::pair<double, double>> arctan_mu_range(std::size_t p);

/// -1 iff sum x_k < threshold; the default threshold is p/2.
class HalfSpaceOracle final : public Oracle {
public:
    explicit HalfSpaceOracle(std::size_t p);
    HalfSpaceOracle(std::size_t p, double threshold);

    std::size_t dimension() const override { return p_; }
    Label evaluate(const UnitPoint& x) const override;
    std::string id() const override;
    nlohmann::json to_json() const override;

    double threshold() const { return threshold_; }

private:
    std::size_t p_;
    double threshold_;
};

/// +1 iff some coordinate equals 1. Attains the largest uncertain volume a
/// full grid can leave.
class UpperFaceOracle final : public Oracle {
public:
    explicit UpperFaceOracle(std::size_t p);

    std::size_t dimension() const override { return p_; }
    Label evaluate(const UnitPoint& x) const override;
    std::string id() const override { return "upper_face"; }
    nlohmann::json to_json() const override;

private:
    std::size_t p_;
};

class ConstantOracle final : public Oracle {
public:
    ConstantOracle(std::size_t p, Label label);

    std::size_t dimension() const override { return p_; }
    Label evaluate(const UnitPoint&) const override { return label_; }
    std::string id() const override;
    nlohmann::json to_json() const override;

private:
    std::size_t p_;
    Label label_;
};

/// Random monotone labeling of the m^p cell grid. A random set of generator
/// cells is drawn; a cell is positive iff it dominates some generator.
/// Continuous queries resolve to the cell containing them (the top face
/// belongs to the last cell).
class StaircaseOracle final : public Oracle {
public:
    StaircaseOracle(std::size_t p, std::size_t resolution, std::uint64_t seed);
    /// Explicit generators, each a vector of cell indices in [0, resolution).
    StaircaseOracle(std::size_t p, std::size_t resolution, std::vector<std::vector<std::size_t>> generators);

    std::size_t dimension() const override { return p_; }
    Label evaluate(const UnitPoint& x) const override;
    std::string id() const override;
    nlohmann::json to_json() const override;

    Label cell_label(const std::vector<std::size_t>& cell) const;
    std::size_t resolution() const { return m_; }
    const std::vector<std::vector<std::size_t>>& generators() const { return generators_; }

private:
    std::size_t p_;
    std::size_t m_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::vector<std::size_t>> generators_;
};

/// Physical-space linear threshold wrapped by a transform:
/// +1 iff sum_k w_k y_k >= threshold where y = apply_transform(x).
/// Weight signs must agree with the dimension directions so the wrapped
/// function is non-decreasing in unit space.
class TransformedOracle final : public Oracle {
public:
    TransformedOracle(Transform t, std::vector<double> weights, double threshold);

    std::size_t dimension() const override { return transform_.dimension(); }
    Label evaluate(const UnitPoint& x) const override;
    std::string id() const override { return "transformed"; }
    nlohmann::json to_json() const override;
    std::vector<std::vector<double>> lattice() const override;

    const Transform& transform() const { return transform_; }

private:
    Transform transform_;
    std::vector<double> weights_;
    double threshold_;
};

/// Outcomes tabulated on a lattice of physical values.
class TabularOracle final : public Oracle {
public:
    struct Row {
        std::vector<double> physical;
        Label label;
    };

    /// Builds the lattice from the distinct physical values per dimension,
    /// checks completeness and audits monotonicity in unit space.
    TabularOracle(Transform t, const std::vector<Row>& rows, std::string source = {});

    std::size_t dimension() const override { return transform_.dimension(); }
    Label evaluate(const UnitPoint& x) const override;
    std::string id() const override { return "tabular"; }
    nlohmann::json to_json() const override;
    std::vector<std::vector<double>> lattice() const override { return unit_levels_; }

    std::size_t size() const { return labels_.size(); }
    const Transform& transform() const { return transform_; }

private:
    std::size_t flat_index(const std::vector<std::size_t>& idx) const;

    Transform transform_;
    std::string source_;
    std::vector<std::vector<double>> unit_levels_;  // sorted ascending
    std::vector<Label> labels_;
};

/// Raised when a table or oracle fails the monotonicity audit.
class MonotonicityAuditError : public Error {
public:
    MonotonicityAuditError(const std::string& what, LabeledPoint lower, LabeledPoint upper);

    const LabeledPoint& lower() const { return lower_; }
    const LabeledPoint& upper() const { return upper_; }

private:
    LabeledPoint lower_;
    LabeledPoint upper_;
};

/// Reads `dim1,...,dimp,label` with physical coordinates.
std::vector<TabularOracle::Row> read_table_csv(const std::string& path);
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<TabularOracle::Row>& rows);

/// Outcomes supplied by a callback (a person or an external simulator).
class InteractiveOracle final : public Oracle {
public:
    using Callback = std::function<Label(const UnitPoint& unit, const std::vector<double>& physical)>;

    InteractiveOracle(Transform t, Callback cb);

    std::size_t dimension() const override { return transform_.dimension(); }
    Label evaluate(const UnitPoint& x) const override;
    std::string id() const override { return "interactive"; }
    nlohmann::json to_json() const override;
    std::vector<std::vector<double>> lattice() const override;

private:
    Transform transform_;
    Callback cb_;
};

/// Builds an oracle from its JSON description. Relative file paths are
/// resolved against base_dir.
OraclePtr make_oracle(const nlohmann::json& spec, const std::string& base_dir = ".");

/// Samples comparable pairs x <= y (on the lattice if there is one) and
/// returns the first pair with f(x) = +1 and f(y) = -1.
std::optional<std::pair<LabeledPoint, LabeledPoint>> audit_monotone(const Oracle& oracle, std::size_t pairs,
                                                                    std::uint64_t seed);

/// Lattice levels of a discrete transform dimension or an empty vector.
std::vector<std::vector<double>> transform_lattice(const Transform& t);

}  // namespace adagrid
