#include "mapweld/server.hpp"

#include <sys/socket.h>

#include <algorithm>

#include <httplib.h>
#include <json.hpp>

#include "mapweld/error.hpp"
#include "mapweld/io.hpp"

namespace mapweld {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  json body;
  body["error"] = {{"code", code}, {"message", message}};
  res.status = status;
  res.set_content(body.dump(), kJson);
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownCell: return 404;
    case ErrorCode::kUndecidedCell:
    case ErrorCode::kStaleProposal: return 409;
    case ErrorCode::kParseError: return 400;
    case ErrorCode::kIoError: return 500;
    default: return 422;
  }
}

// Max over n x n blocks so isolated peaks stay visible when zoomed out.
json heatmap_json(const AccumulationGrid& grid, MapClass cls, int n) {
  const GridSpec& s = grid.spec;
  GridSpec out = s;
  out.resolution = s.resolution * n;
  out.width = (s.width + n - 1) / n;
  out.height = (s.height + n - 1) / n;
  std::vector<std::uint32_t> counts(out.cell_count(), 0);
  const auto& layer = grid.layer(cls);
  for (int j = 0; j < s.height; ++j) {
    for (int i = 0; i < s.width; ++i) {
      auto& slot = counts[out.index(i / n, j / n)];
      slot = std::max(slot, layer[s.index(i, j)]);
    }
  }
  json j;
  j["spec"] = json::parse(grid_spec_to_json(out));
  j["counts"] = std::move(counts);
  return j;
}

}  // namespace

ReviewServer::ReviewServer(ReviewData data)
    : data_(std::move(data)), http_(std::make_unique<httplib::Server>()) {
  // The library default enables SO_REUSEPORT, which would let a second
  // server share a busy port instead of failing.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  routes();
}

ReviewServer::~ReviewServer() = default;

bool ReviewServer::bind(const std::string& host, int port) { return http_->bind_to_port(host, port); }

int ReviewServer::bind_any(const std::string& host) { return http_->bind_to_any_port(host); }

bool ReviewServer::listen() { return http_->listen_after_bind(); }

void ReviewServer::stop() { http_->stop(); }

void ReviewServer::wait_until_ready() const { http_->wait_until_ready(); }

UpdateProposal ReviewServer::proposal() const {
  std::lock_guard lock(mu_);
  return data_.proposal;
}

void ReviewServer::routes() {
  httplib::Server& s = *http_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                         {"Access-Control-Allow-Headers", "Content-Type"}});
  s.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  s.Get("/api/map", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(io::map_to_string(data_.existing), kJson);
  });
  s.Get("/api/new", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(io::map_to_string(data_.fresh), kJson);
  });
  s.Get("/api/proposal", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    res.set_content(proposal_to_string(data_.proposal), kJson);
  });

  s.Get(R"(/api/heatmap/([a-z]+))", [this](const httplib::Request& req, httplib::Response& res) {
    if (!data_.grid) return send_error(res, 404, "NotFound", "no accumulation grid loaded");
    MapClass cls;
    try {
      cls = parse_map_class(req.matches[1].str());
    } catch (const Error& e) {
      return send_error(res, 404, "NotFound", e.what());
    }
    int n = 1;
    if (req.has_param("downsample")) {
      const std::string v = req.get_param_value("downsample");
      try {
        std::size_t used = 0;
        n = std::stoi(v, &used);
        if (used != v.size()) n = 0;
      } catch (const std::exception&) {
        n = 0;
      }
      if (n < 1) return send_error(res, 400, "BadRequest", "downsample must be a positive integer");
    }
    res.set_content(heatmap_json(*data_.grid, cls, n).dump(), kJson);
  });

  s.Post("/api/decision", [this](const httplib::Request& req, httplib::Response& res) {
    std::string cell_id;
    Decision decision;
    try {
      const json body = json::parse(req.body);
      cell_id = body.at("cell_id").get<std::string>();
      const auto token = body.at("decision").get<std::string>();
      if (token != "accepted" && token != "rejected") {
        return send_error(res, 400, "BadRequest", "decision must be 'accepted' or 'rejected'");
      }
      decision = parse_decision(token);
    } catch (const json::exception& e) {
      return send_error(res, 400, "BadRequest", e.what());
    }
    std::lock_guard lock(mu_);
    try {
      UpdateProposal next = data_.proposal;
      const ProposalCell& cell = set_decision(next, cell_id, decision);
      save_proposal(data_.proposal_path, next);
      res.set_content(cell_to_string(cell), kJson);
      data_.proposal = std::move(next);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    }
  });

  s.Post("/api/merge", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mu_);
    const std::size_t pending = data_.proposal.pending();
    if (pending > 0) {
      return send_error(res, 409, "UndecidedCell",
                        std::to_string(pending) + " cell(s) still pending");
    }
    try {
      const MergeResult merged = merge(data_.existing, data_.fresh, data_.proposal, data_.merge);
      const std::string text = io::map_to_string(merged.map);
      if (data_.merged_out) io::write_file_atomic(*data_.merged_out, text);
      res.set_content(text, kJson);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    }
  });

  if (data_.ui_dir) s.set_mount_point("/", data_.ui_dir->string());
}

}  // namespace mapweld
