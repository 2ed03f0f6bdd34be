#include "fademac/manifest.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace fademac {

std::string
sha256_hex(std::string_view data)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
    {
        throw std::runtime_error("sha256 failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i)
    {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

namespace {

std::string
read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

std::string
sha256_file(const std::filesystem::path& path)
{
    return sha256_hex(read_file(path));
}

std::string
utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool
RunManifest::all_checks_passed() const
{
    for (const auto& c : checks)
    {
        if (!c.passed)
        {
            return false;
        }
    }
    return true;
}

std::string
RunManifest::digest() const
{
    std::string text = experiment + "\n";
    for (const auto& o : outputs)
    {
        text += o.file + " " + o.sha256 + "\n";
    }
    return sha256_hex(text);
}

std::string
RunManifest::to_json_text() const
{
    nlohmann::ordered_json j;
    j["tool"] = "fademac";
    j["tool_version"] = tool_version;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["replications"] = replications;
    j["started_utc"] = started_utc;
    j["finished_utc"] = finished_utc;
    j["config"] = config_text;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : outputs)
    {
        j["outputs"].push_back({{"file", o.file}, {"sha256", o.sha256}});
    }
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks)
    {
        j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    j["manifest_digest"] = digest();
    return j.dump(2) + "\n";
}

RunManifest
RunManifest::from_json_text(std::string_view text)
{
    RunManifest m;
    std::string stored;
    try
    {
        const auto j = nlohmann::json::parse(text);
        m.tool_version = j.at("tool_version").get<std::string>();
        m.experiment = j.at("experiment").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.replications = j.at("replications").get<int>();
        m.started_utc = j.at("started_utc").get<std::string>();
        m.finished_utc = j.at("finished_utc").get<std::string>();
        m.config_text = j.at("config").get<std::string>();
        for (const auto& o : j.at("outputs"))
        {
            m.outputs.push_back({o.at("file").get<std::string>(), o.at("sha256").get<std::string>()});
        }
        for (const auto& c : j.at("checks"))
        {
            m.checks.push_back(
                {c.at("name").get<std::string>(), c.at("passed").get<bool>(), c.at("detail").get<std::string>()});
        }
        stored = j.at("manifest_digest").get<std::string>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw std::runtime_error(std::string("malformed manifest: ") + e.what());
    }
    if (stored != m.digest())
    {
        throw std::runtime_error("manifest digest does not match its output list");
    }
    return m;
}

void
RunManifest::write(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary);
    out << to_json_text();
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
}

RunManifest
RunManifest::read(const std::filesystem::path& path)
{
    return from_json_text(read_file(path));
}

} // namespace fademac
