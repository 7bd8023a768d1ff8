#pragma once

#include "hawk/service/service.hpp"

#include <httplib.h>

namespace hawk::service {

// Routes: POST /matches, GET /reports/{id}, GET /flagged, POST /verdicts,
// POST /optimizer, GET /banned, GET /health. Every route except /health
// requires "Authorization: Bearer <token>" when a token is configured.
void install_routes(httplib::Server& server, HawkService& service);

// Splits "host:port"; a bare port binds 127.0.0.1.
std::pair<std::string, int> parse_bind(const std::string& bind);

// Blocks until the server stops. Returns false when the address cannot be bound.
bool run_server(HawkService& service, httplib::Server& server);

} // namespace hawk::service
