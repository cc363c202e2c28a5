#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>

#include "matnet/errors.hpp"

namespace matnet {

/// Minimal CSV emitter. Numbers are printed with 17 significant digits so
/// every double round-trips exactly through the text form.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw ParseError("cannot write '" + path + "'");
  }

  void header(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }

  CsvWriter& field(double v) {
    sep();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out_ << buf;
    return *this;
  }

  CsvWriter& field(long long v) {
    sep();
    out_ << v;
    return *this;
  }

  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }

  CsvWriter& field(const std::string& v) {
    sep();
    out_ << v;
    return *this;
  }

  void end_row() {
    out_ << '\n';
    col_ = 0;
  }

 private:
  void sep() {
    if (col_++ > 0) out_ << ',';
  }

  std::ofstream out_;
  int col_ = 0;
};

}  // namespace matnet
