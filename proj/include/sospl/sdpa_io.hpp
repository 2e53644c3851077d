#pragma once

#include <fstream>
#include <sstream>

#include "sospl/sos_program.hpp"

namespace sospl {

struct SdpaStructure {
  std::size_t n_vars = 0;
  std::vector<long> block_sizes;  // negative = diagonal block
};

namespace detail {

// Rows become cells of a trailing diagonal block: one cell per inequality,
// two opposing cells per equality.
struct SdpaLayout {
  std::size_t diag_cells = 0;
  std::vector<std::pair<std::size_t, bool>> row_cells;  // (cell, negated)

  explicit SdpaLayout(const SosProgram& prog) {
    for (const AffineRow& r : prog.rows) {
      row_cells.push_back({diag_cells, false});
      diag_cells += (r.kind == RowKind::Equality) ? 2 : 1;
    }
  }
};

}  // namespace detail

// Sparse SDPA format: find y with F_1 y_1 + ... + F_m y_m - F_0 >= 0 block
// diagonal. Moment variables map to y, PSD blocks to matrix blocks, affine
// rows to a final diagonal block (equalities as +/- cell pairs).
inline void export_interchange(const SosProgram& prog, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  detail::SdpaLayout layout(prog);

  out << "\"sospl degree-" << prog.degree << " relaxation, " << prog.groups.size()
      << " block group(s)\"\n";
  out << prog.var_count() << " = mDIM\n";
  std::size_t nblocks = prog.blocks.size() + (layout.diag_cells > 0 ? 1 : 0);
  out << nblocks << " = nBLOCK\n";
  for (std::size_t b = 0; b < prog.blocks.size(); ++b)
    out << (b ? " " : "") << prog.blocks[b].dim();
  if (layout.diag_cells > 0)
    out << (prog.blocks.empty() ? "" : " ") << "-" << layout.diag_cells;
  out << " = bLOCKsTRUCT\n";
  for (std::size_t i = 0; i < prog.var_count(); ++i) out << (i ? " " : "") << "0";
  out << "\n";

  // one line per nonzero: matno blkno i j value (1-based, upper triangle)
  for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
    for (const PsdCell& c : prog.blocks[b].cells)
      for (const LinTerm& t : c.form)
        out << (t.var + 1) << " " << (b + 1) << " " << (c.row + 1) << " "
            << (c.col + 1) << " " << format_double(t.coeff) << "\n";
  }
  const std::size_t diag_blk = prog.blocks.size() + 1;
  for (std::size_t r = 0; r < prog.rows.size(); ++r) {
    const AffineRow& row = prog.rows[r];
    std::size_t cell = layout.row_cells[r].first + 1;
    for (const LinTerm& t : row.form) {
      out << (t.var + 1) << " " << diag_blk << " " << cell << " " << cell << " "
          << format_double(t.coeff) << "\n";
      if (row.kind == RowKind::Equality)
        out << (t.var + 1) << " " << diag_blk << " " << (cell + 1) << " "
            << (cell + 1) << " " << format_double(-t.coeff) << "\n";
    }
    if (row.rhs != 0.0) {
      out << 0 << " " << diag_blk << " " << cell << " " << cell << " "
          << format_double(row.rhs) << "\n";
      if (row.kind == RowKind::Equality)
        out << 0 << " " << diag_blk << " " << (cell + 1) << " " << (cell + 1) << " "
            << format_double(-row.rhs) << "\n";
    }
  }
  if (!out) throw io_error("write failure on '" + path + "'");
}

// Reads back the structural header of a .dat-s file.
inline SdpaStructure read_interchange_structure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  SdpaStructure s;
  std::string line;
  int stage = 0;
  std::size_t nblock = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && (line[0] == '"' || line[0] == '*')) continue;
    std::istringstream ls(line);
    if (stage == 0) {
      ls >> s.n_vars;
      stage = 1;
    } else if (stage == 1) {
      ls >> nblock;
      stage = 2;
    } else {
      std::string tok;
      while (ls >> tok && s.block_sizes.size() < nblock) {
        try {
          s.block_sizes.push_back(std::stol(tok));
        } catch (const std::exception&) {
          throw io_error("malformed block structure in '" + path + "'");
        }
      }
      if (s.block_sizes.size() == nblock) return s;
    }
  }
  throw io_error("truncated SDPA file '" + path + "'");
}

// Reads a whitespace-separated moment vector (one value per variable) for
// cross-checking externally produced solutions.
inline std::vector<double> read_solution_vector(const std::string& path,
                                                std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (out.size() != expected)
    throw io_error("solution vector in '" + path + "' has " +
                   std::to_string(out.size()) + " entries, expected " +
                   std::to_string(expected));
  return out;
}

}  // namespace sospl
