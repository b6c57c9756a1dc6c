#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "mixbn/dataset.hpp"
#include "mixbn/parameters.hpp"

namespace mixbn {

inline constexpr std::string_view kLibraryVersion = "1.0.0";
inline constexpr int kDocumentVersion = 1;

/// How a stored network was produced.
struct Provenance {
  std::string score;
  std::string search;
  std::string parameters;
  std::uint64_t seed = 0;
  std::string library_version{kLibraryVersion};
};

struct NetworkDocument {
  BayesianNetwork network;
  Provenance provenance;
};

/// JSON text of the document. Field order is fixed, so equal documents
/// serialize to equal bytes.
std::string serialize_network(const NetworkDocument& doc);

/// Parses and re-validates a document. Throws InputError on any defect.
NetworkDocument parse_network(std::string_view text);

NetworkDocument load_network(const std::filesystem::path& path);
void save_network(const std::filesystem::path& path, const NetworkDocument& doc);

/// Header plus one line per row; labels for discrete cells and 17
/// significant digits for continuous ones.
void write_csv(std::ostream& out, const Dataset& data);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace mixbn
