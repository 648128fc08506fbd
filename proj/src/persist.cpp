#include "hte/persist.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace hte {

FormatError::FormatError(const std::string& what, int line, const std::string& source)
    : std::runtime_error((source.empty() ? "" : source + ": ") + "line " + std::to_string(line) + ": " + what),
      line_(line),
      detail_(what) {}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_list(std::ostream& os, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << num(v[i]);
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_double(const std::string& w, int line) {
  double v = 0;
  const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc{} || p != w.data() + w.size()) throw FormatError("bad number '" + w + "'", line);
  return v;
}

long to_long(const std::string& w, int line) {
  long v = 0;
  const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
  if (ec != std::errc{} || p != w.data() + w.size()) throw FormatError("bad integer '" + w + "'", line);
  return v;
}

std::vector<double> doubles(std::string_view s, std::size_t expect, const char* what, int line) {
  std::vector<double> out;
  for (const auto& w : words(s)) out.push_back(to_double(w, line));
  if (out.size() != expect)
    throw FormatError(std::string(what) + ": expected " + std::to_string(expect) + " values, got " +
                          std::to_string(out.size()),
                      line);
  return out;
}

struct Reader {
  std::istream& is;
  int line = 0;

  std::string next() {
    std::string s;
    if (!std::getline(is, s)) throw FormatError("unexpected end of file", line + 1);
    ++line;
    return s;
  }
  // Reads "<key> <values...>".
  std::vector<std::string> keyed(const std::string& key) {
    auto w = words(next());
    if (w.empty() || w[0] != key) throw FormatError("expected '" + key + "'", line);
    w.erase(w.begin());
    return w;
  }
};

void write_elites(std::ostream& os, const std::vector<Elite>& elites) {
  os << "elites " << elites.size() << '\n';
  for (const Elite& e : elites) {
    os << num(e.fitness) << " | ";
    write_list(os, e.genotype);
    os << " | ";
    write_list(os, e.primary);
    os << " | " << (e.secondary ? e.secondary->str() : std::string("-")) << " | " << num(e.yaw) << '\n';
  }
}

}  // namespace

void save_repertoire(std::ostream& os, const Repertoire& r, const std::string& fingerprint) {
  os << "hbr v1\n";
  if (const auto* g = std::get_if<GridArchive>(&r)) {
    os << "kind grid\n";
    os << "primary_dims " << g->dims().size() << '\n';
    os << "secondary_dims " << (g->pattern_axis() ? kLegs : 0) << '\n';
    os << "cells";
    for (int d : g->dims()) os << ' ' << d;
    os << "\nbounds";
    for (const Bounds& b : g->bounds()) os << ' ' << num(b.lo) << ' ' << num(b.hi);
    os << '\n';
    os << "genotype_size " << (g->empty() ? 0 : g->elites()[0].genotype.size()) << '\n';
    os << "fingerprint " << fingerprint << '\n';
    write_elites(os, g->elites());
  } else {
    const auto& d = std::get<DistArchive>(r);
    os << "kind dist\n";
    os << "primary_dims " << d.primary_dims() << '\n';
    os << "secondary_dims " << (d.has_secondary() ? kLegs : 0) << '\n';
    os << "l " << num(d.l()) << '\n';
    os << "genotype_size " << (d.empty() ? 0 : d.elites()[0].genotype.size()) << '\n';
    os << "fingerprint " << fingerprint << '\n';
    write_elites(os, d.elites());
  }
}

void save_repertoire(const std::string& path, const Repertoire& r, const std::string& fingerprint) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  save_repertoire(os, r, fingerprint);
  if (!os) throw std::runtime_error("write failed for " + path);
}

Repertoire load_repertoire(std::istream& is, const std::string& fingerprint) {
  Reader rd{is};
  if (rd.next() != "hbr v1") throw FormatError("not an hbr v1 file", rd.line);
  const auto kind = rd.keyed("kind");
  if (kind.size() != 1 || (kind[0] != "grid" && kind[0] != "dist")) throw FormatError("kind must be grid or dist", rd.line);
  const bool grid = kind[0] == "grid";

  auto one = [&](const std::string& key) {
    const auto w = rd.keyed(key);
    if (w.size() != 1) throw FormatError("'" + key + "' takes one value", rd.line);
    return w[0];
  };
  const long pdims = to_long(one("primary_dims"), rd.line);
  if (pdims < 1 || pdims > 16) throw FormatError("primary_dims out of range", rd.line);
  const long sdims = to_long(one("secondary_dims"), rd.line);
  if (sdims != 0 && sdims != kLegs) throw FormatError("secondary_dims must be 0 or 6", rd.line);

  std::optional<Repertoire> rep;
  if (grid) {
    const auto cw = rd.keyed("cells");
    if (cw.size() != static_cast<std::size_t>(pdims)) throw FormatError("cells: wrong count", rd.line);
    std::vector<int> dims;
    for (const auto& w : cw) dims.push_back(static_cast<int>(to_long(w, rd.line)));
    const auto bw = rd.keyed("bounds");
    if (bw.size() != 2 * dims.size()) throw FormatError("bounds: wrong count", rd.line);
    std::vector<Bounds> bounds;
    for (std::size_t i = 0; i < dims.size(); ++i) bounds.push_back({to_double(bw[2 * i], rd.line), to_double(bw[2 * i + 1], rd.line)});
    try {
      rep.emplace(GridArchive(dims, bounds, sdims != 0));
    } catch (const std::exception& e) {
      throw FormatError(e.what(), rd.line);
    }
  } else {
    const double l = to_double(one("l"), rd.line);
    try {
      rep.emplace(DistArchive(l, static_cast<std::size_t>(pdims), sdims != 0));
    } catch (const std::exception& e) {
      throw FormatError(e.what(), rd.line);
    }
  }
  const long gsize = to_long(one("genotype_size"), rd.line);
  if (gsize < 0) throw FormatError("negative genotype_size", rd.line);
  const std::string fp = one("fingerprint");
  if (!fingerprint.empty() && fp != fingerprint)
    throw FormatError("model fingerprint " + fp + " does not match " + fingerprint, rd.line);
  const long count = to_long(one("elites"), rd.line);
  if (count < 0) throw FormatError("negative elite count", rd.line);

  for (long i = 0; i < count; ++i) {
    const std::string s = rd.next();
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    for (;;) {
      const auto bar = s.find('|', pos);
      parts.push_back(std::string_view(s).substr(pos, bar == std::string::npos ? std::string::npos : bar - pos));
      if (bar == std::string::npos) break;
      pos = bar + 1;
    }
    if (parts.size() != 5) throw FormatError("expected 5 '|'-separated fields", rd.line);
    Elite e;
    e.fitness = doubles(parts[0], 1, "fitness", rd.line)[0];
    e.genotype = doubles(parts[1], static_cast<std::size_t>(gsize), "genotype", rd.line);
    e.primary = doubles(parts[2], static_cast<std::size_t>(pdims), "primary", rd.line);
    const auto sec = words(parts[3]);
    if (sec.size() != 1) throw FormatError("secondary: expected one token", rd.line);
    if (sec[0] != "-") {
      e.secondary = Pattern::parse(sec[0]);
      if (!e.secondary) throw FormatError("bad contact pattern '" + sec[0] + "'", rd.line);
    }
    if (e.secondary.has_value() != (sdims != 0)) throw FormatError("secondary field does not match header", rd.line);
    e.yaw = doubles(parts[4], 1, "yaw", rd.line)[0];
    bool ok = false;
    try {
      ok = std::visit([&](auto& a) { return a.insert(std::move(e)); }, *rep);
    } catch (const std::exception& ex) {
      throw FormatError(ex.what(), rd.line);
    }
    const std::size_t size = std::visit([](const auto& a) { return a.size(); }, *rep);
    if (!ok || size != static_cast<std::size_t>(i + 1))
      throw FormatError("elite violates the archive invariant", rd.line);
  }
  return std::move(*rep);
}

Repertoire load_repertoire(const std::string& path, const std::string& fingerprint) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open repertoire " + path);
  try {
    return load_repertoire(is, fingerprint);
  } catch (const FormatError& e) {
    throw FormatError(e.detail(), e.line(), path);
  }
}

GridArchive load_grid(const std::string& path, const std::string& fingerprint) {
  Repertoire r = load_repertoire(path, fingerprint);
  if (auto* g = std::get_if<GridArchive>(&r)) return std::move(*g);
  throw std::runtime_error(path + ": expected a grid repertoire");
}

DistArchive load_dist(const std::string& path, const std::string& fingerprint) {
  Repertoire r = load_repertoire(path, fingerprint);
  if (auto* d = std::get_if<DistArchive>(&r)) return std::move(*d);
  throw std::runtime_error(path + ": expected a distance repertoire");
}

}  // namespace hte
