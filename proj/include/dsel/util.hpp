#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace dsel {

// Warnings go to stderr only, never into artifacts, so pipeline output
// stays byte-reproducible.
void warn(const std::string& message);

// FNV-1a 64-bit, used for artifact content hashes in run manifests.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Splits on single spaces. Rejects leading/trailing/double spaces (empty
// fields) by returning false; tokens are appended to `out`.
bool split_tokens(std::string_view line, std::vector<std::string>& out);

std::vector<std::string> split_on(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, char sep);

// True iff `data` is well-formed UTF-8.
bool valid_utf8(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Runs fn(begin..end) over [0, n) split into contiguous chunks, one per
// worker. Results must be written to disjoint, preallocated slots so the
// output is identical for any thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace dsel
