#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "freelab/measures.hpp"
#include "freelab/potentials.hpp"

namespace freelab {

// Descriptor mini-language.
//
//   spec    := name [ '[' spec (';' spec)* ']' ] [ ':' key '=' value (',' key '=' value)* ]
//   value   := number | 'inf' | '-inf' | path (for table files)
//
// Potentials: quadratic:c=  quartic:g=  abs  poly:c0=,c1=,...  arcsine[:radius=]
//   restrict[u]:lo=,hi=  shifted[u]:z=  tilted[u]:lam=  legendre[u]  my[u]:lam=
//   combine[u;v]:theta=  table:path=
// The one-argument wrappers also take the prefix form `shifted:quadratic:c=2,z=1`, and
// `table:<path>` is short for table:path=<path>.
// Measures: semicircle:mean=,var=  arcsine:radius=[,center=]  mp:c=  gibbs[u]
//   translate[m]:a=  table:path=
struct SpecNode {
  std::string name;
  std::size_t position = 0;
  std::vector<SpecNode> children;
  struct Value {
    std::string text;
    std::size_t position = 0;
  };
  std::map<std::string, Value> params;
};

// Syntax only; throws ParseError with the offending column.
SpecNode parse_spec(std::string_view text);

Potential parse_potential(std::string_view text);
GridMeasure parse_measure(std::string_view text, int nodes = kDefaultNodes);

}  // namespace freelab
