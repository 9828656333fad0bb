#pragma once

#include <string>

#include "mcs/attack.hpp"

namespace mcs::cli {

/// Oracle backed by a shell command that reads a plaintext on stdin and
/// writes the ciphertext on stdout. The key never enters this process.
EncryptionOracle make_process_oracle(std::string command);

} // namespace mcs::cli
