#include "ergolab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ergolab/errors.hpp"
#include "ergolab/version.hpp"

namespace ergolab::io {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path() && !target.parent_path().empty())
        fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw argument_error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw numerical_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

std::string csv_preamble(const nlohmann::json& config) {
    std::string out;
    out += "# version: ";
    out += kVersion;
    out += "\n# config: ";
    out += config.dump();
    out += "\n";
    return out;
}

nlohmann::json envelope(const nlohmann::json& config, nlohmann::json data) {
    return nlohmann::json{
        {"version", kVersion}, {"config", config}, {"data", std::move(data)}};
}

}  // namespace ergolab::io
