#pragma once

#include <string>
#include <vector>

namespace trail {

// On-disk network snapshot: `TRAILCKPT1` magic, a text header, then the
// parameter vector as little-endian 64-bit floats in layer order.
struct Checkpoint {
    std::string kind; // policy | encoder
    std::string head; // categorical | mdn
    std::vector<int> dims;
    int mdn_k = 0;
    int mdn_d = 0;
    std::vector<double> params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace trail
