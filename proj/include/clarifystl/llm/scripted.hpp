#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "clarifystl/llm/backend.hpp"

namespace clarifystl::llm {

/// Canned replies keyed by (operation tag, round index).
///
/// File form: one JSON object per line with fields `tag`, `round` and
/// `reply`. Lines sharing a key append to that key's reply list in file
/// order. Blank lines are ignored.
struct ScriptedFixture {
  using Key = std::pair<std::string, int>;
  std::map<Key, std::vector<std::string>> entries;

  void add(std::string tag, int round, std::string reply);
  /// Total number of replies across all keys.
  std::size_t size() const;
};

ScriptedFixture parse_fixture(std::istream& in);
ScriptedFixture load_fixture(const std::filesystem::path& path);
void write_fixture(std::ostream& out, const ScriptedFixture& fixture);

/// Replays a fixture. Each lookup consumes the next reply for its key;
/// a missing or exhausted key raises FixtureMiss. Never touches the network.
class ScriptedBackend : public CompletionBackend {
 public:
  explicit ScriptedBackend(ScriptedFixture fixture);

  std::string complete(const CompletionRequest& request) override;

  std::size_t calls() const;
  std::size_t calls(const std::string& tag) const;

 private:
  mutable std::mutex mu_;
  ScriptedFixture fixture_;
  std::map<ScriptedFixture::Key, std::size_t> cursor_;
  std::map<std::string, std::size_t> calls_by_tag_;
  std::size_t calls_ = 0;
};

} // namespace clarifystl::llm
