#include "doctest.h"

#include "adagrid/session.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>

#include <unistd.h>

using namespace adagrid;
namespace fs = std::filesystem;

namespace {

// Validator for the keywords the published schemas use.
class MiniSchema {
public:
    explicit MiniSchema(const std::string& path) {
        std::ifstream in(path);
        REQUIRE(in.good());
        root_ = nlohmann::json::parse(in);
    }

    std::vector<std::string> errors(const nlohmann::json& doc) const {
        std::vector<std::string> out;
        check(root_, doc, "$", out);
        return out;
    }

private:
    static bool has_type(const nlohmann::json& v, const std::string& t) {
        if (t == "object") return v.is_object();
        if (t == "array") return v.is_array();
        if (t == "string") return v.is_string();
        if (t == "integer") return v.is_number_integer();
        if (t == "number") return v.is_number();
        if (t == "boolean") return v.is_boolean();
        if (t == "null") return v.is_null();
        return false;
    }

    void check(const nlohmann::json& s, const nlohmann::json& v, const std::string& at,
               std::vector<std::string>& out) const {
        if (s.contains("$ref")) {
            const std::string ref = s.at("$ref");
            check(root_.at("definitions").at(ref.substr(std::string("#/definitions/").size())), v, at, out);
            return;
        }
        if (s.contains("type")) {
            const auto& t = s.at("type");
            bool ok = false;
            if (t.is_string()) ok = has_type(v, t);
            for (const auto& alt : t.is_array() ? t : nlohmann::json::array()) ok = ok || has_type(v, alt);
            if (!ok) {
                out.push_back(at + ": wrong type");
                return;
            }
        }
        if (v.is_null()) return;
        if (s.contains("enum") && std::find(s.at("enum").begin(), s.at("enum").end(), v) == s.at("enum").end()) {
            out.push_back(at + ": not in enum: " + v.dump());
        }
        if (v.is_number()) {
            if (s.contains("minimum") && v.get<double>() < s.at("minimum").get<double>()) out.push_back(at + ": < minimum");
            if (s.contains("maximum") && v.get<double>() > s.at("maximum").get<double>()) out.push_back(at + ": > maximum");
        }
        if (v.is_string() && s.contains("pattern") &&
            !std::regex_match(v.get<std::string>(), std::regex(s.at("pattern").get<std::string>()))) {
            out.push_back(at + ": pattern mismatch");
        }
        if (v.is_array()) {
            if (s.contains("minItems") && v.size() < s.at("minItems").get<std::size_t>()) out.push_back(at + ": too short");
            if (s.contains("maxItems") && v.size() > s.at("maxItems").get<std::size_t>()) out.push_back(at + ": too long");
            if (s.contains("items")) {
                for (std::size_t i = 0; i < v.size(); ++i) check(s.at("items"), v[i], at + "[" + std::to_string(i) + "]", out);
            }
        }
        if (v.is_object()) {
            for (const auto& r : s.value("required", nlohmann::json::array())) {
                if (!v.contains(r.get<std::string>())) out.push_back(at + ": missing " + r.get<std::string>());
            }
            const auto props = s.value("properties", nlohmann::json::object());
            for (const auto& [k, sub] : v.items()) {
                if (props.contains(k)) {
                    check(props.at(k), sub, at + "." + k, out);
                } else if (s.contains("additionalProperties") && s.at("additionalProperties") == false) {
                    out.push_back(at + ": unexpected " + k);
                }
            }
        }
    }

    nlohmann::json root_;
};

const std::string kDocs = std::string(ADAGRID_SOURCE_DIR) + "/docs";

StrategySpec make_spec(StrategyKind k, std::size_t p, std::size_t budget, std::uint64_t seed = 1) {
    StrategySpec s;
    s.kind = k;
    s.dimension = p;
    s.budget = budget;
    s.seed = seed;
    return s;
}

Session make_session(Transform t, StrategySpec spec) {
    return Session::create("test", std::move(t), spec, "2024-01-01T00:00:00Z");
}

// Answers every suggestion with the oracle until the session stops suggesting.
std::vector<double> drive(Session& s, const Oracle& f, std::size_t steps) {
    std::vector<double> v;
    for (std::size_t i = 0; i < steps; ++i) {
        const auto sg = s.suggest();
        if (!sg.suggestion) break;
        v.push_back(s.record_outcome(f.evaluate(sg.suggestion->unit)).volume.v_uncertain);
    }
    return v;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("adagrid_sessions_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("session") {
    TEST_CASE("ice breaking session starts on the corners in physical units") {
        auto s = make_session(ice_breaking_transform(), make_spec(StrategyKind::AG, 3, 29));
        TransformedOracle f(ice_breaking_transform(), {1.0, -2.0, -3.0}, 5.0);
        for (int i = 0; i < 3; ++i) {
            const auto sg = s.suggest().suggestion;
            REQUIRE(sg);
            CHECK(sg->level == 0);
            for (std::size_t k = 0; k < 3; ++k) CHECK((sg->unit[k] == 0.0 || sg->unit[k] == 1.0));
            CHECK((sg->physical[0] == doctest::Approx(5.0) || sg->physical[0] == doctest::Approx(40.0)));
            CHECK((sg->physical[1] == doctest::Approx(5.0) || sg->physical[1] == doctest::Approx(15.0)));
            s.record_outcome(f.evaluate(sg->unit));
        }
    }

    TEST_CASE("creation errors and ids") {
        CHECK_THROWS_AS(make_session(ice_breaking_transform(), make_spec(StrategyKind::AG, 2, 10)), UsageError);
        CHECK_THROWS_AS(make_session(identity_transform(2), make_spec(StrategyKind::ALE, 2, 10)), UsageError);
        TempDir dir;
        SessionStore store(dir.path);
        std::set<std::string> ids;
        for (int i = 0; i < 20; ++i) ids.insert(store.create(identity_transform(2), make_spec(StrategyKind::AG, 2, 5)).id());
        CHECK(ids.size() == 20);
        CHECK(store.list().size() == 20);
    }

    TEST_CASE("suggestions are idempotent and follow the tie-break") {
        auto s = make_session(identity_transform(2), make_spec(StrategyKind::AG, 2, 10));
        const auto a = s.suggest();
        const auto b = s.suggest();
        REQUIRE(a.suggestion);
        CHECK(a.suggestion->unit == UnitPoint{1.0, 0.0});
        CHECK(b.suggestion->unit == a.suggestion->unit);
        CHECK(s.status() == SessionStatus::AwaitingOutcome);
        CHECK(s.history().empty());
    }

    TEST_CASE("outcome without a pending suggestion") {
        auto s = make_session(identity_transform(1), make_spec(StrategyKind::GI, 1, 10));
        try {
            s.record_outcome(Label::Positive);
            FAIL("expected SessionStateError");
        } catch (const SessionStateError& e) {
            CHECK(e.code() == "no_pending");
        }
        CHECK_THROWS_AS(label_from_int(0), UsageError);
    }

    TEST_CASE("completion notice") {
        auto s = make_session(identity_transform(2), make_spec(StrategyKind::AG, 2, 100));
        drive(s, ConstantOracle(2, Label::Negative), 100);
        const auto r = s.suggest();
        CHECK_FALSE(r.suggestion);
        CHECK(r.completion == Completion::Certified);
        CHECK(r.v_uncertain == 0.0);
        CHECK(s.status() == SessionStatus::Complete);

        auto b = make_session(identity_transform(2), make_spec(StrategyKind::AG, 2, 3));
        drive(b, IllustrationOracle(), 10);
        CHECK(b.history().size() == 3);
        CHECK(b.suggest().completion == Completion::Budget);
    }

    TEST_CASE("a contradicting outcome makes the session corrupt") {
        TempDir dir;
        SessionStore store(dir.path);
        const std::string id = store.create(identity_transform(1), make_spec(StrategyKind::SG, 1, 3)).id();
        auto step = [&](Label l) {
            return store.mutate(id, [&](Session& s) {
                s.suggest();
                return s.record_outcome(l).record;
            });
        };
        CHECK(step(Label::Positive).point == UnitPoint{0.0});
        CHECK_THROWS_AS(step(Label::Negative), NonMonotoneError);
        store.read(id, [](const Session& s) {
            CHECK(s.status() == SessionStatus::Corrupt);
            REQUIRE(s.witnesses());
            CHECK(s.witnesses()->first.point == UnitPoint{0.5});
            CHECK(s.witnesses()->second.point == UnitPoint{0.0});
            CHECK(s.history().size() == 1);
            CHECK(s.summary().at("witnesses").at("negative").at("label") == -1);
            return 0;
        });
        try {
            store.mutate(id, [](Session& s) { s.suggest(); });
            FAIL("expected SessionStateError");
        } catch (const SessionStateError& e) {
            CHECK(e.code() == "corrupt");
        }
    }

    TEST_CASE("persisted sessions replay to the same state") {
        TempDir dir;
        SessionStore store(dir.path);
        const std::string id = store.create(ice_breaking_transform(), make_spec(StrategyKind::AG, 3, 29)).id();
        TransformedOracle f(ice_breaking_transform(), {1.0, -2.0, -3.0}, 5.0);
        for (int i = 0; i < 12; ++i) {
            store.mutate(id, [&](Session& s) { s.record_outcome(f.evaluate(s.suggest().suggestion->unit)); });
        }
        store.mutate(id, [](Session& s) { s.suggest(); });
        std::ifstream in(dir.path / (id + ".json"));
        const auto disk = nlohmann::json::parse(in);
        const Session back = Session::from_json(disk);
        CHECK(back.to_json() == disk);
        CHECK(back.status() == SessionStatus::AwaitingOutcome);

        auto tampered = disk;
        tampered["history"][3]["label"] = -to_int(label_from_int(tampered["history"][3]["label"].get<int>()));
        CHECK_THROWS_AS(Session::from_json(tampered), CorruptedStateError);
        auto dropped = disk;
        dropped["history"].erase(dropped["history"].size() - 1);
        CHECK_THROWS_AS(Session::from_json(dropped), CorruptedStateError);
        auto versioned = disk;
        versioned["schema_version"] = 99;
        CHECK_THROWS_AS(Session::from_json(versioned), CorruptedStateError);

        CHECK_THROWS_AS(store.read("ffffffffffff", [](const Session&) { return 0; }), SessionNotFound);
    }

    TEST_CASE("uncertain volume never grows over a 29-run ice campaign") {
        auto s = make_session(ice_breaking_transform(), make_spec(StrategyKind::AG, 3, 29));
        TransformedOracle f(ice_breaking_transform(), {1.0, -2.0, -3.0}, 5.0);
        const auto v = drive(s, f, 29);
        CHECK(v.size() == 29);
        for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1]);
    }

    TEST_CASE("report") {
        auto s = make_session(identity_transform(2), make_spec(StrategyKind::AG, 2, 16));
        drive(s, IllustrationOracle(), 1);
        const auto one = s.report({});
        CHECK(one.at("svc").is_null());
        CHECK(one.contains("svc_note"));

        drive(s, IllustrationOracle(), 15);
        REQUIRE(s.history().size() == 16);
        ReportOptions opt;
        opt.grid = 64;
        const auto r = s.report(opt);
        CHECK(r.at("volume").at("v_uncertain") == 0.1875);
        CHECK(std::abs(r.at("slice").at("uncertain_fraction").get<double>() - 0.1875) <= 1.0 / (64 * 64));
        CHECK(r.at("slice").at("rows").size() == 64);
        CHECK_THROWS_AS(s.report(ReportOptions{0, 0, 64, {}}), UsageError);
        CHECK_THROWS_AS(s.report(ReportOptions{0, 5, 64, {}}), UsageError);

        auto one_d = make_session(identity_transform(1), make_spec(StrategyKind::GI, 1, 4));
        drive(one_d, HalfSpaceOracle(1), 4);
        const auto line = one_d.report(ReportOptions{0, 1, 32, {}});
        CHECK(line.at("slice").at("rows").size() == 1);
        CHECK(line.at("slice").at("uncertain_fraction") == 1.0 / 16.0);
    }

    TEST_CASE("session files and reports match the published schemas") {
        const MiniSchema session_schema(kDocs + "/session.schema.json");
        const MiniSchema report_schema(kDocs + "/report.schema.json");

        auto s = make_session(ice_breaking_transform(), make_spec(StrategyKind::AG, 3, 29));
        TransformedOracle f(ice_breaking_transform(), {1.0, -2.0, -3.0}, 5.0);
        CHECK(session_schema.errors(s.to_json()).empty());
        drive(s, f, 20);
        s.suggest();
        const auto errs = session_schema.errors(s.to_json());
        INFO(nlohmann::json(errs).dump());
        CHECK(errs.empty());
        const auto rerrs = report_schema.errors(s.report({}));
        INFO(nlohmann::json(rerrs).dump());
        CHECK(rerrs.empty());

        auto c = make_session(identity_transform(1), make_spec(StrategyKind::SG, 1, 3));
        c.suggest();
        c.record_outcome(Label::Positive);
        c.suggest();
        CHECK_THROWS_AS(c.record_outcome(Label::Negative), NonMonotoneError);
        CHECK(session_schema.errors(c.to_json()).empty());
        CHECK(report_schema.errors(c.report({})).empty());
        CHECK(Session::from_json(c.to_json()).to_json() == c.to_json());

        auto bad = s.to_json();
        bad["status"] = "Sleeping";
        CHECK_FALSE(session_schema.errors(bad).empty());
    }

    TEST_CASE("creation requests") {
        auto [t, spec] = parse_create_request(nlohmann::json::parse(R"({"strategy": "AG",
                                                                         "transform": {"builtin": "ice_breaking"}})"));
        CHECK(t.dimension() == 3);
        CHECK(spec.dimension == 3);
        CHECK(spec.budget == kDefaultSessionBudget);
        auto [t2, spec2] = parse_create_request(nlohmann::json::parse(R"({"strategy": {"kind": "gi", "p": 2, "budget": 7}})"));
        CHECK(t2.dimension() == 2);
        CHECK(spec2.budget == 7);
        CHECK_THROWS_AS(parse_create_request(nlohmann::json::parse(R"({"strategy": "AG"})")), UsageError);
        CHECK_THROWS_AS(parse_create_request(nlohmann::json::parse(R"({"transform": {"builtin": "ice_breaking"}})")),
                        UsageError);
        CHECK_THROWS_AS(parse_create_request(nlohmann::json::parse(R"({"strategy": "AG", "transform": {"builtin": "x"}})")),
                        UsageError);
    }
}
