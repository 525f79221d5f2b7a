#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace washdet::cfg {

// Line-oriented `key = value` store with `#` comments and dotted keys
// (`forest.n_trees = 100`). CLI flags land in the same store and override
// file values, so every run is described by one flat key set.
class Config {
public:
    Config() = default;

    static Config from_file(const std::filesystem::path& path);

    void set(std::string key, std::string value);
    bool contains(std::string_view key) const;
    std::optional<std::string> raw(std::string_view key) const;

    std::string get_string(std::string_view key, std::string_view fallback) const;
    double get_double(std::string_view key, double fallback) const;
    int64_t get_int(std::string_view key, int64_t fallback) const;
    uint64_t get_u64(std::string_view key, uint64_t fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;
    std::vector<double> get_double_list(std::string_view key,
                                        std::vector<double> fallback) const;
    std::vector<std::string> get_string_list(
        std::string_view key, std::vector<std::string> fallback) const;

    // FNV-1a over the sorted `key=value` entries, skipping keys that cannot
    // affect results (output paths, thread counts); anchors the provenance
    // header of every output file.
    uint64_t semantic_hash(std::span<const std::string_view> excluded_keys) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

std::vector<std::string> split_list(std::string_view text);

}  // namespace washdet::cfg
