#include "jbessel/jordan_pair.hpp"

#include <cctype>
#include <regex>

namespace jb {

AlgebraSpec AlgebraSpec::parse(const std::string& text) {
  std::string s;
  for (char c : text) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static const std::regex square(R"((sym|herm_c|spin):([0-9]+))");
  static const std::regex rect(R"(rect:([0-9]+)x([0-9]+))");
  std::smatch m;
  AlgebraSpec out;
  if (std::regex_match(s, m, rect)) {
    out.family = Family::rect;
    out.a = std::stoi(m[1]);
    out.b = std::stoi(m[2]);
  } else if (std::regex_match(s, m, square)) {
    out.family = m[1] == "sym" ? Family::sym : m[1] == "herm_c" ? Family::herm_c : Family::spin;
    out.a = std::stoi(m[2]);
  } else {
    throw JordanError("malformed algebra spec '" + text + "' (expected sym:R, herm_c:R, spin:N or rect:PxQ)");
  }
  return out;
}

std::string AlgebraSpec::str() const {
  switch (family) {
    case Family::sym: return "sym:" + std::to_string(a);
    case Family::herm_c: return "herm_c:" + std::to_string(a);
    case Family::spin: return "spin:" + std::to_string(a);
    case Family::rect: return "rect:" + std::to_string(a) + "x" + std::to_string(b);
  }
  return "?";
}

template class JordanPair<double>;
template class JordanPair<long double>;

}  // namespace jb
