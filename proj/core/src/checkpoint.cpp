#include "trail/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace trail {

namespace {
constexpr char kMagic[] = "TRAILCKPT1";

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");
} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out << kMagic << "\n";
    out << "kind " << ckpt.kind << "\n";
    out << "head " << ckpt.head << "\n";
    out << "dims";
    for (int d : ckpt.dims) out << ' ' << d;
    out << "\n";
    if (ckpt.head == "mdn") out << "mdn " << ckpt.mdn_k << ' ' << ckpt.mdn_d << "\n";
    out << "params " << ckpt.params.size() << "\n";
    out.write(reinterpret_cast<const char*>(ckpt.params.data()),
              static_cast<std::streamsize>(ckpt.params.size() * sizeof(double)));
    if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error("bad checkpoint magic in " + path);
    Checkpoint ckpt;
    std::size_t n_params = 0;
    bool have_params = false;
    while (!have_params && std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "kind") {
            ss >> ckpt.kind;
        } else if (tag == "head") {
            ss >> ckpt.head;
        } else if (tag == "dims") {
            int d;
            while (ss >> d) ckpt.dims.push_back(d);
            if (ckpt.dims.empty())
                throw std::runtime_error("malformed checkpoint header in " + path);
            ss.clear(); // the extraction loop always ends in a failed read
        } else if (tag == "mdn") {
            ss >> ckpt.mdn_k >> ckpt.mdn_d;
        } else if (tag == "params") {
            ss >> n_params;
            have_params = true;
        } else {
            throw std::runtime_error("unknown checkpoint header field '" + tag + "' in " + path);
        }
        if (ss.fail()) throw std::runtime_error("malformed checkpoint header in " + path);
    }
    if (!have_params) throw std::runtime_error("checkpoint header missing params count: " + path);
    if (ckpt.kind.empty() || ckpt.head.empty() || ckpt.dims.size() < 2)
        throw std::runtime_error("incomplete checkpoint header: " + path);
    ckpt.params.resize(n_params);
    in.read(reinterpret_cast<char*>(ckpt.params.data()),
            static_cast<std::streamsize>(n_params * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(n_params * sizeof(double)))
        throw std::runtime_error("truncated checkpoint payload: " + path);
    return ckpt;
}

} // namespace trail
