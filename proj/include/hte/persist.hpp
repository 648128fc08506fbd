#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>

#include "hte/archive.hpp"

namespace hte {

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, int line, const std::string& source = "");
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  int line_;
  std::string detail_;
};

using Repertoire = std::variant<GridArchive, DistArchive>;

/// Text format "hbr v1": a header (kind, dims, discretisation, bounds, model
/// fingerprint, elite count) then one line per elite,
///   fitness | genotype | primary | contact bits or - | yaw
/// with reals printed to 17 significant digits.
void save_repertoire(std::ostream& os, const Repertoire& r, const std::string& fingerprint);
void save_repertoire(const std::string& path, const Repertoire& r, const std::string& fingerprint);

/// Rebuilds the archive by re-inserting every elite in file order and fails
/// if any insertion is refused. An empty `fingerprint` skips that check.
Repertoire load_repertoire(std::istream& is, const std::string& fingerprint);
Repertoire load_repertoire(const std::string& path, const std::string& fingerprint);

GridArchive load_grid(const std::string& path, const std::string& fingerprint);
DistArchive load_dist(const std::string& path, const std::string& fingerprint);

}  // namespace hte
