#include "washdet/config.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace washdet::cfg {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    Config cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        const auto hash = text.find('#');
        if (hash != std::string_view::npos) text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error("config " + path.string() + ":" +
                                     std::to_string(line_no) +
                                     ": expected 'key = value'");
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config " + path.string() + ":" +
                                     std::to_string(line_no) + ": empty key");
        cfg.kv_[std::string(key)] = std::string(value);
    }
    return cfg;
}

void Config::set(std::string key, std::string value) {
    kv_[std::move(key)] = std::move(value);
}

bool Config::contains(std::string_view key) const {
    return kv_.find(std::string(key)) != kv_.end();
}

std::optional<std::string> Config::raw(std::string_view key) const {
    const auto it = kv_.find(std::string(key));
    if (it == kv_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
    const auto v = raw(key);
    return v ? *v : std::string(fallback);
}

double Config::get_double(std::string_view key, double fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    double out = 0.0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
        throw std::runtime_error("config key '" + std::string(key) +
                                 "': not a number: '" + *v + "'");
    return out;
}

int64_t Config::get_int(std::string_view key, int64_t fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    int64_t out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
        throw std::runtime_error("config key '" + std::string(key) +
                                 "': not an integer: '" + *v + "'");
    return out;
}

uint64_t Config::get_u64(std::string_view key, uint64_t fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    uint64_t out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc{} || res.ptr != v->data() + v->size())
        throw std::runtime_error("config key '" + std::string(key) +
                                 "': not an unsigned integer: '" + *v + "'");
    return out;
}

bool Config::get_bool(std::string_view key, bool fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw std::runtime_error("config key '" + std::string(key) +
                             "': not a boolean: '" + *v + "'");
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        const auto item = trim(text.substr(start, comma - start));
        if (!item.empty()) out.emplace_back(item);
        start = comma + 1;
    }
    return out;
}

std::vector<double> Config::get_double_list(std::string_view key,
                                            std::vector<double> fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(*v)) {
        double d = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), d);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw std::runtime_error("config key '" + std::string(key) +
                                     "': not a number list: '" + *v + "'");
        out.push_back(d);
    }
    if (out.empty())
        throw std::runtime_error("config key '" + std::string(key) + "': empty list");
    return out;
}

std::vector<std::string> Config::get_string_list(
    std::string_view key, std::vector<std::string> fallback) const {
    const auto v = raw(key);
    if (!v) return fallback;
    auto out = split_list(*v);
    if (out.empty())
        throw std::runtime_error("config key '" + std::string(key) + "': empty list");
    return out;
}

uint64_t Config::semantic_hash(
    std::span<const std::string_view> excluded_keys) const {
    uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
    const auto feed = [&h](std::string_view s) {
        for (const char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [key, value] : kv_) {  // std::map: sorted
        bool skip = false;
        for (const auto& ex : excluded_keys)
            if (key == ex) skip = true;
        if (skip) continue;
        feed(key);
        feed("=");
        feed(value);
        feed("\n");
    }
    return h;
}

}  // namespace washdet::cfg
