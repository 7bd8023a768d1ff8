#include "hawk/service/http.hpp"

#include "hawk/error.hpp"

#include <iostream>

namespace hawk::service {

namespace {

void reply(httplib::Response& res, const HttpResult& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

bool authorized(const HawkService& svc, const httplib::Request& req, httplib::Response& res) {
    const auto& token = svc.config().token;
    if (token.empty() || req.get_header_value("Authorization") == "Bearer " + token) return true;
    reply(res, error_result(401, "Unauthorized", "missing or wrong bearer token"));
    return false;
}

template <typename F>
httplib::Server::Handler guarded(HawkService& svc, F handler) {
    return [&svc, handler](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(svc, req, res)) return;
        try {
            reply(res, handler(req));
        } catch (const ValidationError& e) {
            reply(res, error_result(400, e.code(), e.what()));
        } catch (const Error& e) {
            reply(res, error_result(500, e.code(), e.what()));
        } catch (const std::exception& e) {
            reply(res, error_result(500, "InternalError", e.what()));
        }
    };
}

} // namespace

std::pair<std::string, int> parse_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    const std::string host = colon == std::string::npos ? "127.0.0.1" : bind.substr(0, colon);
    const std::string port = colon == std::string::npos ? bind : bind.substr(colon + 1);
    try {
        std::size_t used = 0;
        const int p = std::stoi(port, &used);
        if (used != port.size() || p < 0 || p > 65535) throw ConfigError("");
        return {host.empty() ? "127.0.0.1" : host, p};
    } catch (const std::exception&) {
        throw ConfigError("HAWK_BIND must look like host:port, got '" + bind + "'");
    }
}

void install_routes(httplib::Server& server, HawkService& svc) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/health", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.health()); });
    server.Post("/matches", guarded(svc, [&svc](const httplib::Request& req) { return svc.submit_match(req.body); }));
    server.Get(R"(/reports/([^/]+))",
               guarded(svc, [&svc](const httplib::Request& req) { return svc.get_report(req.matches[1].str()); }));
    server.Get("/flagged", guarded(svc, [&svc](const httplib::Request& req) {
                   return svc.flagged(req.has_param("status") ? req.get_param_value("status") : "pending");
               }));
    server.Post("/verdicts", guarded(svc, [&svc](const httplib::Request& req) { return svc.post_verdict(req.body); }));
    server.Post("/optimizer", guarded(svc, [&svc](const httplib::Request& req) { return svc.post_optimizer(req.body); }));
    server.Get("/banned", guarded(svc, [&svc](const httplib::Request&) { return svc.banned_list(); }));
}

bool run_server(HawkService& svc, httplib::Server& server) {
    const auto [host, port] = parse_bind(svc.config().bind);
    install_routes(server, svc);
    std::cerr << "hawk: listening on " << host << ":" << port << "\n";
    return server.listen(host, port);
}

} // namespace hawk::service
