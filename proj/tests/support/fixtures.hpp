#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "retain/core/types.hpp"

namespace retain::testing {

inline constexpr Timestamp kEpoch2020 = 1577836800;  // 2020-01-01T00:00:00Z

inline ContributionEvent make_event(std::string id, std::string key, Timestamp ts, EventKind kind = EventKind::commit,
                                    std::vector<std::string> tags = {}, std::optional<std::string> email = std::nullopt,
                                    std::optional<std::string> name = std::nullopt) {
  ContributionEvent e;
  e.event_id = std::move(id);
  e.contributor_key = std::move(key);
  e.timestamp = ts;
  e.kind = kind;
  e.repo = "acme/widgets";
  e.tags = std::move(tags);
  e.email = std::move(email);
  e.display_name = std::move(name);
  return e;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("retain-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace retain::testing
