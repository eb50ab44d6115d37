#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "wvamp/dataset.hpp"
#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string encode(const std::vector<Dataset>& sets) {
  std::string out;
  for (const Dataset& d : sets) {
    for (const Event& e : d.events) {
      put_le(out, d.experiment_id, 4);
      put_le(out, e.tag == Flavor::B0 ? 0u : 1u, 1);
      std::uint64_t bits;
      std::memcpy(&bits, &e.delta_t, sizeof bits);
      put_le(out, bits, 8);
    }
  }
  return out;
}

Flavor decode_tag(long v, std::size_t where) {
  if (v == 0) return Flavor::B0;
  if (v == 1) return Flavor::B0bar;
  throw InvalidArgument("invalid tag " + std::to_string(v) + " in record " + std::to_string(where));
}

// Groups records by experiment id, preserving record order within each id.
std::vector<Dataset> group(const std::vector<std::pair<std::uint32_t, Event>>& records) {
  std::map<std::uint32_t, Dataset> by_id;
  for (const auto& [id, ev] : records) {
    Dataset& d = by_id[id];
    d.experiment_id = id;
    d.events.push_back(ev);
  }
  std::vector<Dataset> out;
  out.reserve(by_id.size());
  for (auto& [id, d] : by_id) out.push_back(std::move(d));
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream f(path, mode);
  if (!f) throw InvalidArgument("cannot open " + path);
  return f;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream f(path, mode);
  if (!f) throw InvalidArgument("cannot write " + path);
  return f;
}

}  // namespace

std::size_t Dataset::count(Flavor tag) const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [tag](const Event& e) { return e.tag == tag; }));
}

void write_csv(std::ostream& os, const std::vector<Dataset>& sets) {
  os << "experiment_id,tag,delta_t\n";
  char buf[64];
  for (const Dataset& d : sets) {
    for (const Event& e : d.events) {
      auto res = std::to_chars(buf, buf + sizeof buf, e.delta_t, std::chars_format::general, 17);
      os << d.experiment_id << ',' << (e.tag == Flavor::B0 ? 0 : 1) << ',' << std::string_view(buf, res.ptr - buf)
         << '\n';
    }
  }
}

std::vector<Dataset> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "experiment_id,tag,delta_t") throw InvalidArgument("unexpected dataset header: " + line);
  std::vector<std::pair<std::uint32_t, Event>> records;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id_s, tag_s, dt_s;
    if (!std::getline(ls, id_s, ',') || !std::getline(ls, tag_s, ',') || !std::getline(ls, dt_s))
      throw InvalidArgument("malformed dataset row " + std::to_string(row));
    try {
      const unsigned long id = std::stoul(id_s);
      Event ev;
      ev.tag = decode_tag(std::stol(tag_s), row);
      ev.delta_t = std::stod(dt_s);
      if (!std::isfinite(ev.delta_t)) throw InvalidArgument("non-finite delta_t");
      records.emplace_back(static_cast<std::uint32_t>(id), ev);
    } catch (const std::logic_error&) {
      throw InvalidArgument("malformed dataset row " + std::to_string(row) + ": " + line);
    }
  }
  return group(records);
}

void write_binary(std::ostream& os, const std::vector<Dataset>& sets) {
  const std::string bytes = encode(sets);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<Dataset> read_binary(std::istream& is) {
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  constexpr std::size_t kRecord = 13;
  if (bytes.size() % kRecord != 0) throw InvalidArgument("binary dataset size is not a multiple of 13 bytes");
  std::vector<std::pair<std::uint32_t, Event>> records;
  records.reserve(bytes.size() / kRecord);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t k = 0; k < bytes.size() / kRecord; ++k, p += kRecord) {
    Event ev;
    ev.tag = decode_tag(static_cast<long>(p[4]), k);
    const std::uint64_t bits = get_le(p + 5, 8);
    std::memcpy(&ev.delta_t, &bits, sizeof bits);
    if (!std::isfinite(ev.delta_t)) throw InvalidArgument("non-finite delta_t in record " + std::to_string(k));
    records.emplace_back(static_cast<std::uint32_t>(get_le(p, 4)), ev);
  }
  return group(records);
}

void save_csv(const std::string& path, const std::vector<Dataset>& sets) {
  auto f = open_out(path, std::ios::out | std::ios::binary);
  write_csv(f, sets);
}

std::vector<Dataset> load_csv(const std::string& path) {
  auto f = open_in(path, std::ios::in | std::ios::binary);
  return read_csv(f);
}

void save_binary(const std::string& path, const std::vector<Dataset>& sets) {
  auto f = open_out(path, std::ios::out | std::ios::binary);
  write_binary(f, sets);
}

std::vector<Dataset> load_binary(const std::string& path) {
  auto f = open_in(path, std::ios::in | std::ios::binary);
  return read_binary(f);
}

std::vector<Dataset> load_datasets(const std::string& path) {
  const bool bin = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
  return bin ? load_binary(path) : load_csv(path);
}

std::string dataset_hash(const std::vector<Dataset>& sets) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : encode(sets)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace wvamp
