#include "superwriter/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "superwriter/errors.hpp"

namespace superwriter {

namespace fs = std::filesystem;

std::vector<nlohmann::json> read_jsonl(const fs::path & file) {
    std::ifstream in(file);
    if (!in) {
        throw_error(errc::io_failure, "cannot open " + file.string());
    }
    std::vector<nlohmann::json> records;
    std::string                 line;
    size_t                      lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            records.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error & e) {
            throw_error(errc::io_failure,
                        file.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

void write_jsonl(const fs::path & file, const std::vector<nlohmann::json> & records) {
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path());
    }
    fs::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw_error(errc::io_failure, "cannot write " + tmp.string());
        }
        for (const auto & r : records) {
            out << r.dump() << '\n';
        }
    }
    fs::rename(tmp, file);
}

void append_jsonl(const fs::path & file, const nlohmann::json & record) {
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path());
    }
    std::ofstream out(file, std::ios::app);
    if (!out) {
        throw_error(errc::io_failure, "cannot append to " + file.string());
    }
    out << record.dump() << '\n';
}

nlohmann::json read_json_file(const fs::path & file) {
    std::ifstream in(file);
    if (!in) {
        throw_error(errc::io_failure, "cannot open " + file.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error & e) {
        throw_error(errc::io_failure, file.string() + ": " + e.what());
    }
}

void write_json_file(const fs::path & file, const nlohmann::json & doc) {
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path());
    }
    fs::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw_error(errc::io_failure, "cannot write " + tmp.string());
        }
        out << doc.dump(2) << '\n';
    }
    fs::rename(tmp, file);
}

std::string read_text_file(const fs::path & file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw_error(errc::io_failure, "cannot open " + file.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path & file, const std::string & text) {
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path());
    }
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw_error(errc::io_failure, "cannot write " + file.string());
    }
    out << text;
}

} // namespace superwriter
