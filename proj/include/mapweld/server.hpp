#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "mapweld/grid.hpp"
#include "mapweld/types.hpp"
#include "mapweld/updater.hpp"

namespace httplib {
class Server;
}

namespace mapweld {

struct ReviewData {
  VectorMap existing;
  VectorMap fresh;
  UpdateProposal proposal;
  std::filesystem::path proposal_path;          // decisions are persisted here
  std::optional<AccumulationGrid> grid;         // heatmap source
  std::optional<std::filesystem::path> ui_dir;  // static files mounted at /
  std::optional<std::filesystem::path> merged_out;
  MergeParams merge;
};

/**
 * HTTP front end for the review step. Reads are served concurrently;
 * decisions and merges go through one mutex, and every accepted decision is
 * written to the proposal file (temp file + rename) before the response is
 * sent.
 */
class ReviewServer {
 public:
  explicit ReviewServer(ReviewData data);
  ~ReviewServer();

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // False when the address cannot be bound (e.g. port in use).
  bool bind(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int bind_any(const std::string& host);
  // Serves until stop() is called. Requires a successful bind.
  bool listen();
  void stop();
  void wait_until_ready() const;

  UpdateProposal proposal() const;

 private:
  void routes();

  ReviewData data_;
  mutable std::mutex mu_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace mapweld
