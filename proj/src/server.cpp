#include "adagrid/server.hpp"

#include "httplib.h"

#include <sstream>

namespace adagrid {

bool is_loopback_host(const std::string& host) {
    return host == "127.0.0.1" || host == "localhost" || host == "::1" || host.rfind("127.", 0) == 0;
}

namespace {

nlohmann::json labeled_json(const LabeledPoint& p) { return {{"point", p.point.vec()}, {"label", to_int(p.label)}}; }

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const nlohmann::json& witnesses = nullptr) {
    nlohmann::json body{{"code", code}, {"message", message}};
    if (!witnesses.is_null()) body["witnesses"] = witnesses;
    send_json(res, status, body);
}

bool tokens_equal(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    unsigned char diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff |= static_cast<unsigned char>(a[i] ^ b[i]);
    return diff == 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::size_t parse_index(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size() || v < 0) throw std::invalid_argument(what);
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        throw UsageError(std::string("bad ") + what + " '" + s + "'");
    }
}

nlohmann::json suggestion_json(const Session& s, const SuggestResult& r) {
    nlohmann::json out{{"status", to_string(s.status())}, {"v_uncertain", r.v_uncertain}};
    if (r.suggestion) {
        const auto& g = *r.suggestion;
        nlohmann::json names = nlohmann::json::array(), units = nlohmann::json::array();
        for (const auto& d : s.transform().dims) {
            names.push_back(d.name);
            units.push_back(d.units);
        }
        out["suggestion"] = {{"unit", g.unit.vec()},       {"physical", g.physical}, {"names", names},
                             {"units", units},             {"step", g.step},         {"level", g.level},
                             {"candidates_before", g.candidates_before}};
        out["completion"] = nullptr;
    } else {
        out["suggestion"] = nullptr;
        out["completion"] = to_string(r.completion);
    }
    return out;
}

}  // namespace

struct SessionServer::Impl {
    httplib::Server http;
};

SessionServer::SessionServer(ServerOptions opt)
    : opt_(std::move(opt)), store_(opt_.data_dir), impl_(std::make_unique<Impl>()) {
    if (!is_loopback_host(opt_.host) && (!opt_.token || opt_.token->empty())) {
        throw UsageError("refusing to bind " + opt_.host + " without a token; pass --token or bind 127.0.0.1");
    }
    auto& svr = impl_->http;

    svr.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (!opt_.token || req.path == "/health" || req.path.rfind("/ui", 0) == 0) {
            return httplib::Server::HandlerResponse::Unhandled;
        }
        const std::string auth = req.get_header_value("Authorization");
        const std::string prefix = "Bearer ";
        if (auth.rfind(prefix, 0) != 0 || !tokens_equal(auth.substr(prefix.size()), *opt_.token)) {
            send_error(res, 401, "unauthorized", "missing or wrong bearer token");
            return httplib::Server::HandlerResponse::Handled;
        }
        return httplib::Server::HandlerResponse::Unhandled;
    });

    svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const NonMonotoneError& e) {
            send_error(res, 409, "non_monotone", e.what(),
                       {{"negative", labeled_json(e.negative_witness())},
                        {"positive", labeled_json(e.positive_witness())}});
        } catch (const SessionStateError& e) {
            send_error(res, 409, e.code(), e.what());
        } catch (const SessionNotFound& e) {
            send_error(res, 404, "not_found", e.what());
        } catch (const CorruptedStateError& e) {
            send_error(res, 500, "corrupted_state", e.what());
        } catch (const UsageError& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const DomainError& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, 400, "bad_request", std::string("malformed JSON: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "internal", e.what());
        }
    });

    svr.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"ok", true}, {"schema_version", kSessionSchemaVersion}});
    });

    svr.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"sessions", store_.list()}});
    });

    svr.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
        auto [t, spec] = parse_create_request(body);
        const Session s = store_.create(std::move(t), spec);
        send_json(res, 201, s.summary());
    });

    svr.Get(R"(/sessions/([a-z0-9-]+))", [this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, store_.read(req.matches[1], [](const Session& s) { return s.summary(); }));
    });

    svr.Get(R"(/sessions/([a-z0-9-]+)/trace)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string text =
            store_.read(req.matches[1], [](const Session& s) { return trace_to_ndjson(s.history()); });
        res.status = 200;
        res.set_content(text, "application/x-ndjson");
    });

    svr.Post(R"(/sessions/([a-z0-9-]+)/suggest)", [this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, store_.mutate(req.matches[1], [](Session& s) { return suggestion_json(s, s.suggest()); }));
    });

    svr.Post(R"(/sessions/([a-z0-9-]+)/outcome)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body.empty() ? "{}" : req.body);
        if (!body.is_object() || !body.contains("label") || !body.at("label").is_number_integer()) {
            throw UsageError("body must be {\"label\": -1 | 1}");
        }
        const Label label = label_from_int(body.at("label").get<long long>());
        send_json(res, 200, store_.mutate(req.matches[1], [label](Session& s) {
            const auto r = s.record_outcome(label);
            return nlohmann::json{{"record", to_json(r.record)},
                                  {"volume",
                                   {{"v_negative", r.volume.v_negative},
                                    {"v_positive", r.volume.v_positive},
                                    {"v_uncertain", r.volume.v_uncertain}}},
                                  {"session", s.summary()}};
        }));
    });

    svr.Get(R"(/sessions/([a-z0-9-]+)/report)", [this](const httplib::Request& req, httplib::Response& res) {
        ReportOptions opt;
        if (req.has_param("slice_dims")) {
            const auto parts = split(req.get_param_value("slice_dims"), ',');
            if (parts.empty() || parts.size() > 2) throw UsageError("slice_dims must be i or i,j");
            opt.slice_i = parse_index(parts[0], "slice dimension");
            if (parts.size() == 2) opt.slice_j = parse_index(parts[1], "slice dimension");
        }
        if (req.has_param("grid")) opt.grid = parse_index(req.get_param_value("grid"), "grid");
        if (req.has_param("fixed")) {
            for (const auto& part : split(req.get_param_value("fixed"), ',')) {
                if (part.empty()) {
                    opt.fixed.emplace_back();
                } else {
                    try {
                        opt.fixed.emplace_back(std::stod(part));
                    } catch (const std::logic_error&) {
                        throw UsageError("bad fixed value '" + part + "'");
                    }
                }
            }
        }
        send_json(res, 200, store_.read(req.matches[1], [&](const Session& s) { return s.report(opt); }));
    });

    if (opt_.static_dir) {
        if (!svr.set_mount_point("/ui", opt_.static_dir->string())) {
            throw UsageError("static directory '" + opt_.static_dir->string() + "' does not exist");
        }
    }
}

SessionServer::~SessionServer() { stop(); }

int SessionServer::bind() {
    auto& svr = impl_->http;
    if (opt_.port == 0) {
        port_ = svr.bind_to_any_port(opt_.host);
        if (port_ < 0) throw IoError("cannot bind " + opt_.host);
    } else {
        if (!svr.bind_to_port(opt_.host, opt_.port)) {
            throw IoError("cannot bind " + opt_.host + ":" + std::to_string(opt_.port) + " (port in use?)");
        }
        port_ = opt_.port;
    }
    return port_;
}

void SessionServer::serve() { impl_->http.listen_after_bind(); }

void SessionServer::stop() {
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void SessionServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

std::string SessionServer::address() const {
    const bool v6 = opt_.host.find(':') != std::string::npos;
    return "http://" + (v6 ? "[" + opt_.host + "]" : opt_.host) + ":" + std::to_string(port_);
}

}  // namespace adagrid
