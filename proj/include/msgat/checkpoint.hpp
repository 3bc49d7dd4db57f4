#pragma once

#include <string>

#include "msgat/model.hpp"

namespace msgat {

struct Checkpoint {
    int version = 1;
    ModelConfig config;
    int num_metapaths = 0;
    ParameterSet params;
};

// Self-describing text format; doubles are written with %.17g so values
// round-trip exactly and identical runs produce identical bytes.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace msgat
