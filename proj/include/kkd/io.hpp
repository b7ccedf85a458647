#pragma once

#include <filesystem>
#include <string>

#include "kkd/grid.hpp"

namespace kkd::io {

/// CSV columns: t, re, im (17 significant digits, byte-stable per build).
void save_signal_csv(const ComplexSignal& sig, const std::filesystem::path& path);
ComplexSignal load_signal_csv(const std::filesystem::path& path);

/// Self-describing JSON envelope {"grid":{t_start,dt,n},"samples":[[re,im],...]}.
void save_signal_json(const ComplexSignal& sig, const std::filesystem::path& path);
ComplexSignal load_signal_json(const std::filesystem::path& path);

/// Write via temp file + rename so readers never observe partial output.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// FNV-1a hash of a byte string, hex encoded; stamps configs into outputs.
std::string fnv1a_hex(const std::string& bytes);

std::string format_double(double v);

}  // namespace kkd::io
