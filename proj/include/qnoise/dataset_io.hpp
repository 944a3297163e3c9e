#pragma once

// Plain-text dataset format. One item per line:
//
//   <label> <n_qubits> <re_0> <im_0> <re_1> <im_1> ... <re_{2^n-1}> <im_{2^n-1}>
//
// Reals are printed with 17 significant digits, enough for strtod to recover
// the identical double. Lines starting with '#' and blank lines are ignored.

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qnoise/errors.hpp"
#include "qnoise/statevec.hpp"
#include "qnoise/training.hpp"

namespace qnoise {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_dataset(std::ostream& out, const QuantumDataset& data) {
  out << "# qnoise dataset v1: label n_qubits (re im)*2^n\n";
  for (const auto& it : data.items) {
    out << it.label << ' ' << it.state.n_qubits();
    for (const cplx& a : it.state.amplitudes()) out << ' ' << format_real(a.real()) << ' ' << format_real(a.imag());
    out << '\n';
  }
}

inline QuantumDataset read_dataset(std::istream& in) {
  QuantumDataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    auto fail = [&](const std::string& why) {
      return domain_error("dataset line " + std::to_string(line_no) + ": " + why);
    };
    int label = 0;
    int n = 0;
    if (!(fields >> label >> n)) throw fail("expected label and qubit count");
    if (label != 1 && label != -1) throw fail("label must be -1 or +1");
    if (n < 1 || n > kMaxQubits) throw fail("qubit count out of range");
    std::vector<cplx> amps(std::size_t{1} << n);
    for (auto& a : amps) {
      std::string re_tok, im_tok;
      if (!(fields >> re_tok >> im_tok)) throw fail("too few amplitudes");
      char* end = nullptr;
      const double re = std::strtod(re_tok.c_str(), &end);
      if (*end != '\0') throw fail("bad real '" + re_tok + "'");
      const double im = std::strtod(im_tok.c_str(), &end);
      if (*end != '\0') throw fail("bad real '" + im_tok + "'");
      a = cplx{re, im};
    }
    std::string extra;
    if (fields >> extra) throw fail("trailing fields");
    data.items.push_back({StateVector::from_amplitudes(std::move(amps)), label});
  }
  data.validate();
  return data;
}

}  // namespace qnoise
