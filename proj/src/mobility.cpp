#include "dacemad/mobility.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>

namespace dacemad::mobility {

VehicleStream VehicleStream::repeating(std::vector<VehicleEntry> entries) {
  VehicleStream s;
  s.repeating_ = true;
  s.snapshots_.push_back({0, std::move(entries)});
  return s;
}

VehicleStream VehicleStream::finite(std::vector<VehicleSnapshot> snapshots) {
  VehicleStream s;
  s.repeating_ = false;
  for (std::size_t t = 0; t < snapshots.size(); ++t) {
    if (snapshots[t].timestep != t) {
      throw TraceError("snapshots must be consecutive from t=0");
    }
  }
  s.snapshots_ = std::move(snapshots);
  return s;
}

std::optional<std::size_t> VehicleStream::length() const {
  if (repeating_) return std::nullopt;
  return snapshots_.size();
}

bool VehicleStream::has(std::size_t t) const { return repeating_ || t < snapshots_.size(); }

std::span<const VehicleEntry> VehicleStream::entries(std::size_t t) const {
  if (repeating_) return snapshots_.front().entries;
  if (t >= snapshots_.size()) throw std::out_of_range("VehicleStream: past end of trace");
  return snapshots_[t].entries;
}

VehicleSnapshot VehicleStream::snapshot(std::size_t t) const {
  const auto e = entries(t);
  return {t, {e.begin(), e.end()}};
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_field(const std::string& text, T& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void row_error(std::size_t line, const std::string& what) {
  throw TraceError("trace line " + std::to_string(line) + ": " + what);
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

TraceData parse_trace(std::istream& in, const Area& area) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw TraceError("trace: missing header");
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  if (trim(line) != kTraceHeader) {
    throw TraceError("trace line 1: expected header '" + std::string(kTraceHeader) + "'");
  }

  TraceData data;
  std::vector<VehicleSnapshot> snapshots;
  std::set<std::string> seen_at_t;
  std::optional<std::size_t> current_t;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != 5) row_error(line_no, "expected 5 fields");

    std::size_t t = 0;
    VehicleEntry e;
    if (!parse_field(fields[0], t)) row_error(line_no, "bad time-step '" + fields[0] + "'");
    e.id = fields[1];
    if (e.id.empty()) row_error(line_no, "empty vehicle_id");
    if (!parse_field(fields[2], e.x) || !parse_field(fields[3], e.y) ||
        !parse_field(fields[4], e.speed) || !std::isfinite(e.x) || !std::isfinite(e.y) ||
        !std::isfinite(e.speed)) {
      row_error(line_no, "bad numeric field");
    }
    if (current_t && t < *current_t) row_error(line_no, "time-steps must be non-decreasing");
    if (!current_t || t != *current_t) {
      seen_at_t.clear();
      current_t = t;
    }
    if (!seen_at_t.insert(e.id).second) {
      row_error(line_no, "vehicle '" + e.id + "' repeated within time-step");
    }
    while (snapshots.size() <= t) snapshots.push_back({snapshots.size(), {}});

    if (!area.contains(e.position()) || e.speed < 0.0 || e.speed > kMaxTraceSpeed + 1e-9) {
      ++data.rejected_rows;
      continue;
    }
    snapshots[t].entries.push_back(std::move(e));
  }
  data.stream = VehicleStream::finite(std::move(snapshots));
  return data;
}

TraceData load_trace(const std::filesystem::path& path, const Area& area) {
  std::ifstream in(path);
  if (!in) throw TraceError(path.string() + ": cannot open trace file");
  try {
    return parse_trace(in, area);
  } catch (const TraceError& e) {
    throw TraceError(path.string() + ": " + e.what());
  }
}

void write_trace(std::ostream& out, const VehicleStream& stream, std::size_t steps) {
  out << kTraceHeader << '\n';
  std::string row;
  for (std::size_t t = 0; t < steps && stream.has(t); ++t) {
    for (const auto& e : stream.entries(t)) {
      row.clear();
      row += std::to_string(t);
      row += ',';
      row += e.id;
      row += ',';
      append_number(row, e.x);
      row += ',';
      append_number(row, e.y);
      row += ',';
      append_number(row, e.speed);
      out << row << '\n';
    }
  }
}

namespace {

std::string vehicle_name(std::size_t i) { return "v" + std::to_string(i); }

// Splits n among weights by largest remainder; ties go to the earlier entry.
std::vector<std::size_t> allocate(std::size_t n, const std::vector<Cluster>& clusters) {
  std::vector<std::size_t> counts(clusters.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const double exact = clusters[k].weight * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[k];
    remainders.emplace_back(exact - std::floor(exact), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
    ++counts[remainders[i % remainders.size()].second];
  }
  return counts;
}

std::vector<VehicleEntry> static_clusters(const ScenarioSpec& spec, const Area& area,
                                          std::mt19937_64& rng) {
  std::vector<VehicleEntry> out;
  if (spec.n_vehicles == 0) return out;
  const auto counts = allocate(spec.n_vehicles, spec.clusters);
  constexpr int kMaxTries = 100000;
  for (std::size_t k = 0; k < spec.clusters.size(); ++k) {
    const auto& c = spec.clusters[k];
    // Truncated Gaussian: sigma = radius / 2, resampled until inside both
    // the cluster disc and the area.
    std::normal_distribution<double> offset(0.0, c.radius / 2.0);
    for (std::size_t i = 0; i < counts[k]; ++i) {
      int tries = 0;
      while (true) {
        if (++tries > kMaxTries) {
          throw ScenarioError("cluster " + std::to_string(k) + " has no room inside the area");
        }
        const double dx = offset(rng);
        const double dy = offset(rng);
        const Point2 p{c.centre.x + dx, c.centre.y + dy};
        if (dx * dx + dy * dy <= c.radius * c.radius && area.contains(p)) {
          out.push_back({vehicle_name(out.size()), p.x, p.y, 0.0});
          break;
        }
      }
    }
  }
  return out;
}

std::vector<VehicleEntry> cross_roads(const ScenarioSpec& spec, const Area& area,
                                      std::mt19937_64& rng) {
  const Point2 centre = spec.cross_centre.value_or(
      Point2{(area.x_min + area.x_max) / 2.0, (area.y_min + area.y_max) / 2.0});
  const double half = spec.strip_width / 2.0;
  std::uniform_real_distribution<double> along_x(area.x_min, area.x_max);
  std::uniform_real_distribution<double> along_y(area.y_min, area.y_max);
  std::uniform_real_distribution<double> across_h(std::max(area.y_min, centre.y - half),
                                                  std::min(area.y_max, centre.y + half));
  std::uniform_real_distribution<double> across_v(std::max(area.x_min, centre.x - half),
                                                  std::min(area.x_max, centre.x + half));
  std::vector<VehicleEntry> out;
  const std::size_t horizontal = (spec.n_vehicles + 1) / 2;
  for (std::size_t i = 0; i < spec.n_vehicles; ++i) {
    double x = 0.0;
    double y = 0.0;
    if (i < horizontal) {
      x = along_x(rng);
      y = across_h(rng);
    } else {
      x = across_v(rng);
      y = along_y(rng);
    }
    out.push_back({vehicle_name(i), x, y, 0.0});
  }
  return out;
}

std::vector<VehicleEntry> edge_concentration(const ScenarioSpec& spec, const Area& area,
                                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> xs(area.x_max - spec.band_width, area.x_max);
  std::uniform_real_distribution<double> ys(area.y_min, area.y_max);
  std::vector<VehicleEntry> out;
  for (std::size_t i = 0; i < spec.n_vehicles; ++i) {
    const double x = xs(rng);
    const double y = ys(rng);
    out.push_back({vehicle_name(i), x, y, 0.0});
  }
  return out;
}

}  // namespace

VehicleStream generate_scenario(const ScenarioSpec& spec, const Area& area, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  switch (spec.kind) {
    case ScenarioKind::static_clusters:
      if (spec.clusters.empty() && spec.n_vehicles > 0) {
        throw ScenarioError("static_clusters needs at least one cluster");
      }
      for (const auto& c : spec.clusters) {
        if (!(c.radius > 0.0) || !area.contains(c.centre)) {
          throw ScenarioError("cluster centre outside area or non-positive radius");
        }
      }
      return VehicleStream::repeating(static_clusters(spec, area, rng));
    case ScenarioKind::cross_roads:
      if (!(spec.strip_width > 0.0)) throw ScenarioError("strip_width must be > 0");
      return VehicleStream::repeating(cross_roads(spec, area, rng));
    case ScenarioKind::edge_concentration:
      if (!(spec.band_width > 0.0) || spec.band_width > area.width()) {
        throw ScenarioError("band_width must be in (0, area width]");
      }
      return VehicleStream::repeating(edge_concentration(spec, area, rng));
    case ScenarioKind::trace:
      return load_trace(spec.trace_path, area).stream;
  }
  throw ScenarioError("unknown scenario kind");
}

}  // namespace dacemad::mobility
