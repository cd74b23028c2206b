#include "radon/common.hpp"

#include <cstdio>

namespace radon {

void require(bool condition, std::string_view message) {
  if (!condition) throw InvalidArgument(std::string(message));
}

double UniformGrid::spacing() const {
  return periodic ? (hi - lo) / n : (hi - lo) / (n - 1);
}

double UniformGrid::node(int i) const {
  if (!periodic && i == n - 1) return hi;
  return lo + i * spacing();
}

Vec UniformGrid::nodes() const {
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = node(i);
  return x;
}

namespace {
std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

std::uint64_t substream_seed(std::uint64_t root, std::string_view name,
                             std::uint64_t index) {
  return splitmix64(splitmix64(root ^ fnv1a(name)) + splitmix64(index + 1));
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace radon
