#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "superwriter/chat_types.hpp"

namespace superwriter {

// Completion cache keyed by request digest. Entries live in memory and,
// when a directory is configured, as one JSON file per key written with
// atomic rename so concurrent writers of the same key settle on a full
// entry (last writer wins). Entries never expire within a run.
class response_cache {
  public:
    response_cache() = default;
    explicit response_cache(std::filesystem::path dir);

    // Movable so a configured cache can be handed to the gateway; the mutex
    // starts fresh in the destination (moves happen before any sharing).
    response_cache(response_cache && other) noexcept {
        std::scoped_lock lock(other.mu_);
        dir_ = std::move(other.dir_);
        mem_ = std::move(other.mem_);
    }
    response_cache & operator=(response_cache && other) noexcept {
        if (this != &other) {
            std::scoped_lock lock(mu_, other.mu_);
            dir_ = std::move(other.dir_);
            mem_ = std::move(other.mem_);
        }
        return *this;
    }

    std::optional<chat_response> get(const std::string & key) const;
    void put(const std::string & key, const chat_response & response);

    const std::filesystem::path & dir() const { return dir_; }

  private:
    std::filesystem::path dir_; // empty = memory only
    mutable std::mutex    mu_;
    mutable std::unordered_map<std::string, chat_response> mem_;
};

} // namespace superwriter
