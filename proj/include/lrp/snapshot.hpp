#pragma once

#include <iosfwd>
#include <string>

#include "lrp/environment.hpp"

namespace lrp {

// Text format: one header line, then one stored edge per line "x1 .. xd  y1 .. yd".
void write_snapshot(const Environment& env, std::ostream& out);
Environment read_snapshot(std::istream& in);

void save_snapshot(const Environment& env, const std::string& path);
Environment load_snapshot(const std::string& path);

std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace lrp
