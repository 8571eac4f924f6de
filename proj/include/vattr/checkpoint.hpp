// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "vattr/trainer.hpp"

namespace vattr {

// Single JSON document, format tag "vattr-checkpoint-v1". Doubles are
// written with shortest round-trip precision, so save/load is bit-exact and
// two identical training runs produce byte-identical files.
std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vattr
