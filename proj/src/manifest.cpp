#include "thermocast/manifest.hpp"

#include <array>
#include <memory>

#include <openssl/evp.h>

#include "json_util.hpp"

namespace thermocast {

namespace {

class Digest {
public:
    Digest() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw IoError("SHA-256 context unavailable");
    }
    void update(const void* data, std::size_t size) {
        if (EVP_DigestUpdate(ctx_.get(), data, size) != 1) throw IoError("SHA-256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw IoError("SHA-256 finalization failed");
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 0xF];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

detail::json entries(const std::vector<ManifestEntry>& list) {
    auto arr = detail::json::array();
    for (const auto& e : list) arr.push_back({{"name", e.name}, {"sha256", e.sha256}});
    return arr;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    Digest d;
    std::array<char, 1 << 16> buffer{};
    while (in) {
        in.read(buffer.data(), buffer.size());
        if (in.gcount() > 0) d.update(buffer.data(), static_cast<std::size_t>(in.gcount()));
    }
    if (in.bad()) throw IoError("read failed: " + path.string());
    return d.hex();
}

Manifest make_manifest(std::string command, std::string_view config_text,
                       const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
                       const std::vector<std::filesystem::path>& outputs, std::optional<std::uint64_t> seed) {
    Manifest m;
    m.command = std::move(command);
    m.tool_version = THERMOCAST_VERSION;
    m.config_sha256 = sha256_hex(config_text);
    m.seed = seed;
    for (const auto& p : inputs) m.inputs.push_back({p.filename().string(), sha256_file(p)});
    for (const auto& p : outputs) m.outputs.push_back({p.generic_string(), sha256_file(out_dir / p)});
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    detail::json j = {{"format", "thermocast-manifest/1"},
                      {"command", manifest.command},
                      {"tool_version", manifest.tool_version},
                      {"config_sha256", manifest.config_sha256},
                      {"inputs", entries(manifest.inputs)},
                      {"outputs", entries(manifest.outputs)}};
    j["seed"] = manifest.seed ? detail::json(*manifest.seed) : detail::json(nullptr);
    detail::write_json(path, j);
}

}  // namespace thermocast
