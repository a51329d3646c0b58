#include "superwriter/cache.hpp"

#include <fstream>

#include "superwriter/errors.hpp"
#include "superwriter/jsonl.hpp"

namespace superwriter {

namespace fs = std::filesystem;

response_cache::response_cache(fs::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) {
        fs::create_directories(dir_);
    }
}

std::optional<chat_response> response_cache::get(const std::string & key) const {
    {
        std::lock_guard lock(mu_);
        auto            it = mem_.find(key);
        if (it != mem_.end()) {
            return it->second;
        }
    }
    if (dir_.empty()) {
        return std::nullopt;
    }
    fs::path file = dir_ / (key + ".json");
    if (!fs::exists(file)) {
        return std::nullopt;
    }
    chat_response resp;
    try {
        resp = read_json_file(file).get<chat_response>();
    } catch (const std::exception & e) {
        throw_error(errc::cache_corrupt, file.string() + ": " + e.what());
    }
    std::lock_guard lock(mu_);
    mem_[key] = resp;
    return resp;
}

void response_cache::put(const std::string & key, const chat_response & response) {
    {
        std::lock_guard lock(mu_);
        mem_[key] = response;
    }
    if (!dir_.empty()) {
        write_json_file(dir_ / (key + ".json"), nlohmann::json(response));
    }
}

} // namespace superwriter
