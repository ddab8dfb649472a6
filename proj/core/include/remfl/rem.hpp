#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "remfl/gmm.hpp"

namespace remfl {

enum class RemRole { local, global, baseline };

std::string to_string(RemRole role);
RemRole rem_role_from_string(const std::string& text);

/// A stored interference model plus the cumulative number of chi samples it
/// has absorbed.
struct RemEntry {
    GmmParams model;
    std::int64_t n_samples = 0;
};

/// Keyed (location, channel) -> RemEntry map. The same type backs the Local
/// REMs (one per platoon), the Global REM and the baseline store.
class RemStore {
  public:
    using Key = std::pair<int, int>;  // (location_index, channel_index)

    RemStore() = default;
    RemStore(RemRole role, std::string owner) : role_(role), owner_(std::move(owner)) {}

    /// nullptr when absent; absence is a normal result, not an error.
    const RemEntry* get(int location_index, int channel_index) const;

    /// Validates the entry and overwrites silently.
    void put(int location_index, int channel_index, RemEntry entry);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::map<Key, RemEntry>& entries() const { return entries_; }

    RemRole role() const { return role_; }
    const std::string& owner() const { return owner_; }

    bool operator==(const RemStore& other) const = default;

  private:
    std::map<Key, RemEntry> entries_;
    RemRole role_ = RemRole::local;
    std::string owner_;
};

inline bool operator==(const RemEntry& a, const RemEntry& b) {
    return a.n_samples == b.n_samples && a.model.sigma == b.model.sigma &&
           a.model.means == b.model.means && a.model.weights == b.model.weights;
}

class RemParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class RemVersionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Single JSON document with a schema_version field; model parameters
/// round-trip exactly (shortest-round-trip decimal serialization).
void save_rem(const RemStore& store, const std::string& path);

/// Throws RemParseError on malformed input (with file position) and
/// RemVersionError on a schema version mismatch. Never returns a partial
/// store.
RemStore load_rem(const std::string& path);

/// One CSV row per entry: location, channel, n_r, J, sigma, means, weights.
void write_rem_csv(const RemStore& store, const std::string& path);

}  // namespace remfl
