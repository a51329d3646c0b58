#include "superwriter/manifest.hpp"

#include <ctime>

#include "superwriter/chat_types.hpp"
#include "superwriter/errors.hpp"
#include "superwriter/jsonl.hpp"

namespace superwriter {

namespace {

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm     tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

run_manifest load_or_init_manifest(const std::filesystem::path & path,
                                   const nlohmann::json &        snapshot) {
    if (std::filesystem::exists(path)) {
        run_manifest m = read_json_file(path).get<run_manifest>();
        if (m.config_snapshot != snapshot)
            throw_error(errc::manifest_conflict,
                        "run at " + path.parent_path().string() +
                            " was started with a different configuration; use a fresh run "
                            "directory or restore the original settings");
        return m;
    }

    run_manifest m;
    m.created_at      = utc_now();
    m.config_snapshot = snapshot;
    m.run_id = "run-" + m.created_at.substr(0, 10) + "-" + sha256_hex(snapshot.dump()).substr(0, 8);
    save_manifest(m, path);
    return m;
}

void save_manifest(const run_manifest & manifest, const std::filesystem::path & path) {
    std::filesystem::create_directories(path.parent_path());
    write_json_file(path, manifest);
}

void to_json(nlohmann::json & j, const run_manifest & m) {
    j = nlohmann::json{{"run_id", m.run_id},
                       {"created_at", m.created_at},
                       {"config", m.config_snapshot},
                       {"counters", m.counters},
                       {"errors", m.errors}};
}

void from_json(const nlohmann::json & j, run_manifest & m) {
    m.run_id          = j.at("run_id").get<std::string>();
    m.created_at      = j.at("created_at").get<std::string>();
    m.config_snapshot = j.at("config");
    m.counters        = j.value("counters", std::map<std::string, std::int64_t>{});
    m.errors          = j.value("errors", std::vector<std::string>{});
}

} // namespace superwriter
