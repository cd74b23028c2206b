#include "radon/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace radon {

namespace {

constexpr char kMagic[8] = {'R', 'A', 'D', 'O', 'N', 'B', 'I', 'N'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

}  // namespace

std::int64_t NamedArray::size() const {
  std::int64_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

const NamedArray& Container::get(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw FormatError("container has no array '" + name + "'");
}

bool Container::has(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return true;
  return false;
}

void Container::add(std::string name, const Mat& m) {
  NamedArray a{std::move(name), {m.rows(), m.cols()}, {}};
  a.data.resize(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.data[r * m.cols() + c] = m(r, c);
  arrays.push_back(std::move(a));
}

void Container::add(std::string name, const Vec& v) {
  arrays.push_back(NamedArray{std::move(name), {v.size()}, std::vector<double>(v.begin(), v.end())});
}

void Container::add(NamedArray a) {
  require(a.size() == static_cast<std::int64_t>(a.data.size()), "array shape does not match data");
  arrays.push_back(std::move(a));
}

Mat Container::matrix(const std::string& name) const {
  const auto& a = get(name);
  std::int64_t rows = a.shape.empty() ? 1 : a.shape[0];
  std::int64_t cols = rows == 0 ? 0 : a.size() / rows;
  Mat m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) m(r, c) = a.data[r * cols + c];
  return m;
}

Vec Container::vector(const std::string& name) const {
  const auto& a = get(name);
  return Eigen::Map<const Vec>(a.data.data(), static_cast<Eigen::Index>(a.data.size()));
}

std::string serialize(const Container& c) {
  json header = c.header;
  json arrays = json::array();
  for (const auto& a : c.arrays) arrays.push_back({{"name", a.name}, {"shape", a.shape}});
  header["arrays"] = arrays;
  const std::string text = header.dump();

  std::string out(kMagic, kMagic + 8);
  put_u64(out, text.size());
  out += text;
  for (const auto& a : c.arrays)
    for (double d : a.data) put_f64(out, d);
  return out;
}

Container deserialize(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw FormatError("not a radon container (bad magic)");
  const std::uint64_t len = get_u64(bytes, 8);
  if (16 + len > bytes.size()) throw FormatError("truncated container header");
  Container c;
  try {
    c.header = json::parse(bytes.substr(16, len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed container header: ") + e.what());
  }
  std::size_t pos = 16 + len;
  for (const auto& entry : c.header.at("arrays")) {
    NamedArray a{entry.at("name").get<std::string>(), entry.at("shape").get<std::vector<std::int64_t>>(), {}};
    const auto n = static_cast<std::size_t>(a.size());
    if (pos + 8 * n > bytes.size()) throw FormatError("truncated array '" + a.name + "'");
    a.data.resize(n);
    for (std::size_t i = 0; i < n; ++i, pos += 8) a.data[i] = std::bit_cast<double>(get_u64(bytes, pos));
    c.arrays.push_back(std::move(a));
  }
  if (pos != bytes.size()) throw FormatError("trailing bytes after container arrays");
  c.header.erase("arrays");
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

void write_container(const std::filesystem::path& path, const Container& c) {
  write_file(path, serialize(c));
}

Container read_container(const std::filesystem::path& path) { return deserialize(read_file(path)); }

json grid_to_json(const UniformGrid& g) {
  return {{"lo", g.lo}, {"hi", g.hi}, {"n", g.n}, {"periodic", g.periodic}};
}

UniformGrid grid_from_json(const json& j) {
  try {
    UniformGrid g{j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("n").get<int>(),
                  j.at("periodic").get<bool>()};
    require(g.hi > g.lo && g.n >= 2, "grid must have positive length and at least two nodes");
    return g;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed grid descriptor: ") + e.what());
  }
}

}  // namespace radon
