// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

// Text resources embedded at configure time from data/. The files remain the
// single source of truth; the binary never needs to locate them at runtime.
namespace vattr::resources {

// Extraction dialogue sent as the system message; contains a {DESCRIPTORS}
// placeholder for the active vocabulary.
const std::string& llm_system_prompt_template();

// The stock sentence patterns with a [Descriptor] placeholder.
std::vector<std::string> prompt_templates();

// alias -> descriptor-name pairs for the lexical extraction scan.
std::vector<std::pair<std::string, std::string>> descriptor_aliases();

}  // namespace vattr::resources
