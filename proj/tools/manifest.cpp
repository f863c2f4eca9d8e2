#include "manifest.hpp"

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "deepmorph/error.hpp"
#include "deepmorph/io.hpp"

namespace deepmorph::cli {

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "sha256 initialisation failed");
    }
    std::vector<char> buffer(1 << 16);
    while (in) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        const auto got = in.gcount();
        if (got > 0) {
            EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(got));
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

std::string RunManifest::render() const {
    std::ostringstream os;
    os << "command " << command << '\n';
    for (const auto& [key, value] : parameters) {
        os << "param " << key << ' ' << value << '\n';
    }
    for (const auto& p : inputs) {
        os << "input " << sha256_file(p) << ' ' << p.string() << '\n';
    }
    for (const auto& p : outputs) {
        os << "output " << sha256_file(p) << ' ' << p.string() << '\n';
    }
    return os.str();
}

void RunManifest::write(const fs::path& path) const {
    io::write_text(path, render());
}

}  // namespace deepmorph::cli
