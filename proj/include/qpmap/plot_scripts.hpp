#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qpmap/common.hpp"
#include "qpmap/scan.hpp"

namespace qpmap {

namespace detail {

inline std::string read_first_line(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string line;
  std::getline(in, line);
  return line;
}

inline std::vector<std::string> sorted_matches(const std::filesystem::path& dir,
                                               const std::string& prefix,
                                               const std::string& suffix) {
  std::vector<std::string> out;
  if (!std::filesystem::exists(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() >= prefix.size() + suffix.size() && name.rfind(prefix, 0) == 0 &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string gp_prelude(const std::string& name) {
  std::string s;
  s += "# " + name + ".gp: plotting script for the CSV artifacts next to it.\n";
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set term pngcairo size 900,700\n";
  s += "set output '" + name + ".png'\n";
  return s;
}

inline const char* kClassIndexFn =
    "cls(s) = (s eq 'diverged') ? 0 : (s eq 'chaotic') ? 1 : "
    "(s eq 'non_reducible_curve') ? 2 : (s eq 'reducible_curve') ? 3 : "
    "(s eq 'zero_lyapunov') ? 4 : 5\n";

}  // namespace detail

// Figures the toolkit knows how to draw, keyed by name; `needs` lists the
// artifact files a figure cannot be drawn without.
struct FigureSpec {
  std::string name;
  std::vector<std::string> needs;
};

inline const std::vector<FigureSpec>& figure_catalog() {
  static const std::vector<FigureSpec> cat = {
      {"fig_grid_classes", {"grid.csv"}},
      {"fig_grid_lyapunov", {"grid.csv"}},
      {"fig_sna_candidates", {"sna.csv"}},
      {"fig_sna_gamma", {"sna.csv"}},
      {"fig_branches", {}},         // any branch_*.csv
      {"fig_branch_norms", {}},     // any branch_*.csv
      {"fig_constraints", {}},      // any constraints_*.csv
      {"fig_sets", {}},             // any sets_*.csv
      {"fig_envelopes", {"envelopes.csv"}},
      {"fig_model_plane", {"model.csv"}},
  };
  return cat;
}

// Script content for one figure, built against the artifacts currently in
// dir. Throws MissingArtifact when required data is absent.
inline std::string figure_script(const std::string& name, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  auto require = [&](const std::string& file) {
    if (!fs::exists(dir / file))
      throw MissingArtifact("figure " + name + " needs " + file);
  };

  if (name == "fig_grid_classes") {
    require("grid.csv");
    std::string s = detail::gp_prelude(name);
    s += "set xlabel 'alpha'\nset ylabel 'epsilon'\n";
    s += detail::kClassIndexFn;
    s += "set cbrange [-0.5:5.5]\nset palette maxcolors 6\n";
    s += "set palette defined (0 'grey', 1 'red', 2 'orange', 3 'blue', 4 'green', 5 'black')\n";
    s += "plot 'grid.csv' using 1:2:(cls(stringcolumn(3))) with points pt 5 ps 0.6 palette "
         "notitle\n";
    return s;
  }
  if (name == "fig_grid_lyapunov") {
    require("grid.csv");
    std::string s = detail::gp_prelude(name);
    s += "set xlabel 'alpha'\nset ylabel 'epsilon'\n";
    s += "set cbrange [-1:0.5]\nset cblabel 'Lyapunov exponent'\n";
    s += "plot 'grid.csv' using 1:2:4 with points pt 5 ps 0.6 palette notitle\n";
    return s;
  }
  if (name == "fig_sna_candidates" || name == "fig_sna_gamma") {
    require("sna.csv");
    // Locate the last gamma/cand column pair from the header.
    const std::string header = detail::read_first_line(dir / "sna.csv");
    int last_cand = -1, last_gamma = -1, col = 1;
    std::string field;
    for (std::size_t i = 0; i <= header.size(); ++i) {
      if (i == header.size() || header[i] == ',') {
        if (field.rfind("cand_", 0) == 0) last_cand = col;
        if (field.rfind("gamma_", 0) == 0) last_gamma = col;
        field.clear();
        ++col;
      } else {
        field.push_back(header[i]);
      }
    }
    if (last_cand < 0 || last_gamma < 0)
      throw MissingArtifact("sna.csv lacks gamma/cand columns");
    std::string s = detail::gp_prelude(name);
    s += "set xlabel 'alpha'\nset ylabel 'epsilon'\n";
    if (name == "fig_sna_candidates") {
      s += "plot 'sna.csv' using (column(" + std::to_string(last_cand) +
           ") > 0 ? $1 : NaN):2 with points pt 5 ps 0.6 lc rgb 'purple' title 'sensitivity "
           "candidates'\n";
    } else {
      s += "set logscale cb\nset cblabel 'phase sensitivity'\n";
      s += "plot 'sna.csv' using 1:2:" + std::to_string(last_gamma) +
           " with points pt 5 ps 0.6 palette notitle\n";
    }
    return s;
  }
  if (name == "fig_branches" || name == "fig_branch_norms") {
    const auto files = detail::sorted_matches(dir, "branch_", ".csv");
    std::vector<std::string> data;
    for (const std::string& f : files)
      if (f.rfind("branch_coeffs_", 0) != 0) data.push_back(f);
    if (data.empty()) throw MissingArtifact("figure " + name + " needs branch_*.csv");
    std::string s = detail::gp_prelude(name);
    if (name == "fig_branches") {
      s += "set xlabel 'alpha'\nset ylabel 'epsilon'\n";
      s += "plot ";
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (i) s += ", ";
        s += "'" + data[i] + "' using 2:3 with lines lw 2 title '" + data[i] + "'";
      }
      s += "\n";
    } else {
      s += "set xlabel 'epsilon'\nset ylabel 'sup |u\\'\\''|'\nset logscale y\n";
      s += "plot ";
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (i) s += ", ";
        s += "'" + data[i] + "' using 3:8 with lines lw 2 title '" + data[i] + "'";
      }
      s += "\n";
    }
    return s;
  }
  if (name == "fig_constraints") {
    const auto files = detail::sorted_matches(dir, "constraints_", ".csv");
    if (files.empty()) throw MissingArtifact("figure fig_constraints needs constraints_*.csv");
    std::string s = detail::gp_prelude(name);
    s += "set xlabel 'alpha'\nset ylabel 'epsilon'\n";
    s += "plot [2.05:4] 1-2/x with lines lw 2 lc rgb 'black' title 'first backward bound'";
    for (const std::string& f : files)
      s += ", '" + f + "' using 1:2 with lines lw 2 title '" + f + "'";
    s += "\n";
    return s;
  }
  if (name == "fig_sets") {
    const auto files = detail::sorted_matches(dir, "sets_", ".csv");
    if (files.empty()) throw MissingArtifact("figure fig_sets needs sets_*.csv");
    std::string s = detail::gp_prelude(name);
    s += "set xlabel 'theta'\nset ylabel 'x'\n";
    s += "plot ";
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (i) s += ", ";
      s += "'" + files[i] + "' using 1:2 with dots title '" + files[i] + "'";
    }
    s += "\n";
    return s;
  }
  if (name == "fig_envelopes") {
    require("envelopes.csv");
    std::string s = detail::gp_prelude(name);
    s += "set xlabel 'theta'\nset ylabel 'x'\n";
    s += "plot 'envelopes.csv' using 1:2 with lines lw 2 lc rgb 'blue' title 'lower', "
         "'envelopes.csv' using 1:3 with lines lw 2 lc rgb 'red' title 'upper'";
    if (std::filesystem::exists(dir / "attractor.csv"))
      s += ", 'attractor.csv' using 1:2 with dots lc rgb 'black' title 'attractor'";
    s += "\n";
    return s;
  }
  if (name == "fig_model_plane") {
    require("model.csv");
    std::string s = detail::gp_prelude(name);
    s += "set xlabel 'mu'\nset ylabel 'lambda'\n";
    s += detail::kClassIndexFn;
    s += "set cbrange [-0.5:5.5]\nset palette maxcolors 6\n";
    s += "set palette defined (0 'grey', 1 'red', 2 'orange', 3 'blue', 4 'green', 5 'black')\n";
    s += "plot 'model.csv' using 1:2:(cls(stringcolumn(3))) with points pt 5 ps 0.6 palette "
         "notitle";
    if (std::filesystem::exists(dir / "model_boundary.csv")) {
      for (const char* label :
           {"stability_boundary_upper", "reducibility_edge_upper", "period_two_band_upper",
            "period_two_band_lower"}) {
        s += ", 'model_boundary.csv' using (stringcolumn(3) eq '" + std::string(label) +
             "' ? $2 : NaN):1 with lines lw 2 title '" + label + "'";
      }
    }
    s += "\n";
    return s;
  }
  throw std::invalid_argument("unknown figure '" + name + "'");
}

// Write scripts into dir. With an explicit request, absence of data is an
// error; with no request, every figure whose data is present is written.
inline std::vector<std::string> emit_plots(const std::filesystem::path& dir,
                                           const std::vector<std::string>& requested = {}) {
  std::vector<std::string> written;
  auto write_one = [&](const std::string& name) {
    const std::string content = figure_script(name, dir);
    const std::filesystem::path path = dir / (name + ".gp");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    written.push_back(path.string());
  };
  if (!requested.empty()) {
    for (const std::string& name : requested) write_one(name);
    return written;
  }
  for (const FigureSpec& spec : figure_catalog()) {
    try {
      write_one(spec.name);
    } catch (const MissingArtifact&) {
    }
  }
  return written;
}

}  // namespace qpmap
