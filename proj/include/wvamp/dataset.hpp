#pragma once

// Events, datasets and their CSV / binary serialization.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wvamp/dynamics.hpp"

namespace wvamp {

struct Event {
  double delta_t = 0.0;  // ps
  Flavor tag = Flavor::B0;

  bool operator==(const Event&) const = default;
};

struct Dataset {
  std::uint32_t experiment_id = 0;
  std::vector<Event> events;

  std::size_t count(Flavor tag) const;
  bool operator==(const Dataset&) const = default;
};

/// CSV with header experiment_id,tag,delta_t; tag 0 = B0, 1 = B0bar.
void write_csv(std::ostream& os, const std::vector<Dataset>& sets);
std::vector<Dataset> read_csv(std::istream& is);

/// Little-endian records: u32 experiment_id, u8 tag, f64 delta_t.
void write_binary(std::ostream& os, const std::vector<Dataset>& sets);
std::vector<Dataset> read_binary(std::istream& is);

void save_csv(const std::string& path, const std::vector<Dataset>& sets);
std::vector<Dataset> load_csv(const std::string& path);
void save_binary(const std::string& path, const std::vector<Dataset>& sets);
std::vector<Dataset> load_binary(const std::string& path);

/// Loads by extension: ".bin" is binary, anything else CSV.
std::vector<Dataset> load_datasets(const std::string& path);

/// FNV-1a 64 over the binary encoding, as 16 hex digits.
std::string dataset_hash(const std::vector<Dataset>& sets);

}  // namespace wvamp
