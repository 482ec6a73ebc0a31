#include "safebench/random.hpp"

namespace safebench {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index, Stream stream) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ run_index);
  s = splitmix64(s ^ static_cast<std::uint64_t>(stream));
  return s;
}

}  // namespace safebench
