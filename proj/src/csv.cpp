#include "varistep/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "varistep/error.hpp"

namespace varistep {
namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& field) {
  if (field.empty()) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw InvalidInput("malformed number '" + field + "' in CSV");
  }
  return value;
}

unsigned parse_flags(const std::string& field) {
  unsigned flags = 0;
  if (field.empty()) return flags;
  for (const std::string& name : [&] {
         std::vector<std::string> parts;
         std::stringstream ss(field);
         std::string part;
         while (std::getline(ss, part, '|')) parts.push_back(part);
         return parts;
       }()) {
    if (name == "bootstrap") flags |= step_flag::bootstrap;
    else if (name == "degenerate") flags |= step_flag::degenerate;
    else if (name == "retried") flags |= step_flag::retried;
    else if (name == "fixed") flags |= step_flag::fixed;
    else throw InvalidInput("unknown flag '" + name + "' in CSV");
  }
  return flags;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  writer(file);
  file.flush();
  if (!file) throw IoError("failed writing '" + path + "'");
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<std::string> trajectory_csv_header(int dimension) {
  std::vector<std::string> h{"k", "t", "tau"};
  for (const char* sym : {"q", "p"}) {
    if (dimension == 1) {
      h.emplace_back(sym);
    } else {
      for (int i = 1; i <= dimension; ++i) h.push_back(std::string(sym) + "_" + std::to_string(i));
    }
  }
  for (const char* col : {"E_mid", "energy_residual", "newton_iters", "flags"}) h.emplace_back(col);
  return h;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  const int n = trajectory.dimension();
  write_row(out, trajectory_csv_header(n));
  std::vector<std::string> row;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    row.clear();
    row.push_back(std::to_string(k));
    row.push_back(format_double(trajectory.t[k]));
    const bool has_step = k < trajectory.steps.size();
    row.push_back(has_step ? format_double(trajectory.steps[k].tau) : "");
    for (int i = 0; i < n; ++i) row.push_back(format_double(trajectory.q[k][i]));
    for (int i = 0; i < n; ++i) row.push_back(format_double(trajectory.p[k][i]));
    if (has_step) {
      const StepState& s = trajectory.steps[k];
      row.push_back(format_double(s.e_mid));
      row.push_back(format_double(s.energy_residual));
      row.push_back(std::to_string(s.newton_iterations));
      row.push_back(format_flags(s.flags));
    } else {
      row.insert(row.end(), 4, "");
    }
    write_row(out, row);
  }
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
  write_file(path, [&](std::ostream& out) { write_trajectory_csv(trajectory, out); });
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty CSV");
  const std::vector<std::string> header = split(line);
  if (header.size() < 9 || (header.size() - 7) % 2 != 0) throw InvalidInput("malformed CSV header");
  const int n = static_cast<int>((header.size() - 7) / 2);
  if (header != trajectory_csv_header(n)) throw InvalidInput("unexpected CSV header");

  Trajectory traj;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split(line));
    if (rows.back().size() != header.size()) {
      throw InvalidInput("CSV row " + std::to_string(rows.size()) + " has the wrong field count");
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (r[0] != std::to_string(k)) throw InvalidInput("CSV rows out of order");
    Vector q(n);
    Vector p(n);
    for (int i = 0; i < n; ++i) {
      q[i] = parse_double(r[3 + i]);
      p[i] = parse_double(r[3 + n + i]);
    }
    traj.t.push_back(parse_double(r[1]));
    traj.q.push_back(std::move(q));
    traj.p.push_back(std::move(p));
    if (k + 1 < rows.size()) {
      StepState s;
      s.k = k;
      s.tau = parse_double(r[2]);
      s.e_mid = parse_double(r[3 + 2 * n]);
      s.energy_residual = parse_double(r[4 + 2 * n]);
      s.newton_iterations = static_cast<int>(parse_double(r[5 + 2 * n]));
      s.flags = parse_flags(r[6 + 2 * n]);
      traj.steps.push_back(std::move(s));
    }
  }
  return traj;
}

void write_density_csv(const DensityReport& report, std::ostream& out) {
  write_row(out, {"k", "tau_k", "dtau_obs", "dtau_pred", "flag"});
  for (const DensityRow& r : report.rows) {
    write_row(out, {std::to_string(r.k), format_double(r.tau), format_double(r.dtau_obs),
                    format_double(r.dtau_pred), r.flag});
  }
}

void write_density_csv(const DensityReport& report, const std::string& path) {
  write_file(path, [&](std::ostream& out) { write_density_csv(report, out); });
}

}  // namespace varistep
