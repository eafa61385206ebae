#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace paraprobe {

/// Stable 64-bit FNV-1a; used wherever a hash ends up in a file or a seed.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Sixteen lowercase hex digits of fnv1a64(text).
std::string text_hash(std::string_view text);

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Per-call seed derivation: a pure function of the run seed and the call's
/// coordinates, so scheduling order never changes results.
std::uint64_t derive_seed(std::uint64_t run_seed, std::initializer_list<std::uint64_t> coords);

/// Lowercased alphanumeric tokens (maximal runs of [A-Za-z0-9]).
std::vector<std::string> word_tokens(std::string_view text);

std::string to_lower(std::string_view text);

std::string_view trim(std::string_view text);

/// Runs fn(i) for i in [0, count) on up to `parallelism` threads. Exceptions
/// are collected and the one with the lowest index is rethrown.
void parallel_for(std::size_t count, int parallelism, const std::function<void(std::size_t)>& fn);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace paraprobe
