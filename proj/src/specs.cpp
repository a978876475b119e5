#include "freelab/specs.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "freelab/equilibrium.hpp"
#include "freelab/errors.hpp"

namespace freelab {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  SpecNode parse_all() {
    SpecNode node = parse_node();
    if (pos_ != text_.size()) fail(pos_, "unexpected '" + std::string(1, text_[pos_]) + "'");
    return node;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw ParseError(std::string(text_), at, what);
  }

  bool at(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail(start, "expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  SpecNode parse_node() {
    SpecNode node;
    node.position = pos_;
    node.name = identifier();
    if (at('[')) {
      ++pos_;
      node.children.push_back(parse_node());
      while (at(';')) {
        ++pos_;
        node.children.push_back(parse_node());
      }
      if (!at(']')) fail(pos_, "expected ']'");
      ++pos_;
    }
    if (at(':')) {
      ++pos_;
      if (node.name == "table" && !value_has_key()) {
        const std::size_t value_at = pos_;
        while (pos_ < text_.size() && text_[pos_] != ';' && text_[pos_] != ']') ++pos_;
        if (pos_ == value_at) fail(value_at, "empty table path");
        node.params["path"] = {std::string(text_.substr(value_at, pos_ - value_at)), value_at};
        return node;
      }
      if (const char* key = wrapper_key(node.name); key && node.children.empty() && !value_has_key()) {
        // Prefix form `shifted:<spec>,z=1`: the inner spec swallows the trailing keys, so the
        // wrapper's own key is taken back from the innermost node.
        node.children.push_back(parse_node());
        if (*key) hoist(node, key);
        while (at(',')) {
          ++pos_;
          parameter(node);
        }
        return node;
      }
      parameter(node);
      while (at(',')) {
        ++pos_;
        parameter(node);
      }
    }
    return node;
  }

  void parameter(SpecNode& node) {
    const std::size_t key_at = pos_;
    const std::string key = identifier();
    if (!at('=')) fail(pos_, "expected '=' after '" + key + "'");
    ++pos_;
    const std::size_t value_at = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ';' && text_[pos_] != ']') ++pos_;
    if (pos_ == value_at) fail(value_at, "empty value for '" + key + "'");
    if (node.params.count(key)) fail(key_at, "duplicate key '" + key + "'");
    node.params[key] = {std::string(text_.substr(value_at, pos_ - value_at)), value_at};
  }

  // True when the text after ':' starts with `name=`.
  bool value_has_key() const {
    std::size_t i = pos_;
    while (i < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i])) || text_[i] == '_')) ++i;
    return i > pos_ && i < text_.size() && text_[i] == '=';
  }

  static const char* wrapper_key(const std::string& name) {
    if (name == "shifted") return "z";
    if (name == "tilted" || name == "my") return "lam";
    if (name == "legendre") return "";
    return nullptr;
  }

  static void hoist(SpecNode& node, const std::string& key) {
    SpecNode* owner = nullptr;
    for (SpecNode* inner = &node.children.back();; inner = &inner->children.back()) {
      if (inner->params.count(key)) owner = inner;
      if (inner->children.empty()) break;
    }
    if (!owner) return;
    node.params[key] = owner->params[key];
    owner->params.erase(key);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Semantic checks and construction, reporting positions into the original text.
class Builder {
 public:
  explicit Builder(std::string_view text) : text_(text) {}

  Potential potential(const SpecNode& node) const {
    const std::string& n = node.name;
    if (n == "quadratic") {
      allow(node, {"c"}, 0);
      return make_quadratic(number(node, "c", 1.0));
    }
    if (n == "quartic") {
      allow(node, {"g"}, 0);
      return make_quartic(number(node, "g", 1.0));
    }
    if (n == "abs") {
      allow(node, {}, 0);
      return make_abs();
    }
    if (n == "poly") {
      std::vector<double> coefficients;
      for (const auto& [key, value] : node.params) {
        int degree = -1;
        if (key.size() >= 2 && key[0] == 'c') {
          const auto [end, ec] = std::from_chars(key.data() + 1, key.data() + key.size(), degree);
          if (ec != std::errc() || end != key.data() + key.size()) degree = -1;
        }
        if (degree < 0 || degree > 16)
          fail(value.position - key.size() - 1, "poly keys are c0 ... c16, got '" + key + "'");
        if (static_cast<int>(coefficients.size()) <= degree) coefficients.resize(degree + 1, 0.0);
        coefficients[degree] = to_number(value);
      }
      if (coefficients.empty()) fail(node.position, "poly needs at least one coefficient");
      allow(node, {}, 0, true);
      return make_polynomial(std::move(coefficients));
    }
    if (n == "arcsine") {
      allow(node, {"radius"}, 0);
      return make_arcsine_potential(number(node, "radius", 1.0));
    }
    if (n == "restrict") {
      allow(node, {"lo", "hi"}, 1);
      return restrict_domain(potential(node.children[0]), number(node, "lo", -kInfinity),
                             number(node, "hi", kInfinity));
    }
    if (n == "shifted") {
      allow(node, {"z"}, 1);
      return shift_potential(potential(node.children[0]), required(node, "z"));
    }
    if (n == "tilted") {
      allow(node, {"lam"}, 1);
      return tilt_linear(potential(node.children[0]), required(node, "lam"));
    }
    if (n == "legendre") {
      allow(node, {}, 1);
      return legendre_transform(potential(node.children[0]));
    }
    if (n == "my") {
      allow(node, {"lam"}, 1);
      return moreau_yosida(potential(node.children[0]), required(node, "lam"));
    }
    if (n == "combine") {
      allow(node, {"theta"}, 2);
      return combine(potential(node.children[0]), potential(node.children[1]),
                     number(node, "theta", 0.5));
    }
    if (n == "table") {
      allow(node, {"path"}, 0);
      const std::string path = text_param(node, "path");
      return make_table_potential(read_table(path), "table:path=" + path);
    }
    fail(node.position, "unknown potential '" + n + "'");
  }

  GridMeasure measure(const SpecNode& node, int nodes) const {
    const std::string& n = node.name;
    if (n == "semicircle") {
      allow(node, {"mean", "var"}, 0);
      return make_semicircular(number(node, "mean", 0.0), number(node, "var", 1.0), nodes);
    }
    if (n == "arcsine") {
      allow(node, {"radius", "center"}, 0);
      return make_arcsine(number(node, "radius", 1.0), nodes, number(node, "center", 0.0));
    }
    if (n == "mp") {
      allow(node, {"c"}, 0);
      return make_marchenko_pastur_family(number(node, "c", 1.0), nodes);
    }
    if (n == "gibbs") {
      allow(node, {}, 1);
      SolverSettings cfg;
      cfg.nodes = nodes;
      return solve_equilibrium(potential(node.children[0]), cfg).measure;
    }
    if (n == "translate") {
      allow(node, {"a"}, 1);
      return translate(measure(node.children[0], nodes), required(node, "a"));
    }
    if (n == "table") {
      allow(node, {"path"}, 0);
      return GridMeasure::from_table(read_table(text_param(node, "path")), nodes);
    }
    fail(node.position, "unknown measure '" + n + "'");
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& what) const {
    throw ParseError(std::string(text_), at, what);
  }

  void allow(const SpecNode& node, std::initializer_list<const char*> keys, std::size_t children,
             bool any_keys = false) const {
    if (node.children.size() != children)
      fail(node.position, "'" + node.name + "' takes " + std::to_string(children) +
                              " bracketed argument(s), got " + std::to_string(node.children.size()));
    if (any_keys) return;
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, value] : node.params)
      if (!known.count(key))
        fail(value.position - key.size() - 1, "unknown key '" + key + "' for '" + node.name + "'");
  }

  double to_number(const SpecNode::Value& value) const {
    double out = 0.0;
    const char* first = value.text.data();
    const char* last = first + value.text.size();
    const auto [end, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || end != last) fail(value.position, "not a number: '" + value.text + "'");
    return out;
  }

  double number(const SpecNode& node, const std::string& key, double fallback) const {
    const auto it = node.params.find(key);
    return it == node.params.end() ? fallback : to_number(it->second);
  }

  double required(const SpecNode& node, const std::string& key) const {
    const auto it = node.params.find(key);
    if (it == node.params.end()) fail(node.position, "'" + node.name + "' needs '" + key + "='");
    return to_number(it->second);
  }

  std::string text_param(const SpecNode& node, const std::string& key) const {
    const auto it = node.params.find(key);
    if (it == node.params.end()) fail(node.position, "'" + node.name + "' needs '" + key + "='");
    return it->second.text;
  }

  static std::vector<std::pair<double, double>> read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read table '" + path + "'");
    std::vector<std::pair<double, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream fields(line);
      double x = 0.0;
      double y = 0.0;
      if (fields >> x >> y) rows.emplace_back(x, y);
    }
    return rows;
  }

  std::string_view text_;
};

}  // namespace

SpecNode parse_spec(std::string_view text) { return Parser(text).parse_all(); }

Potential parse_potential(std::string_view text) {
  return Builder(text).potential(parse_spec(text));
}

GridMeasure parse_measure(std::string_view text, int nodes) {
  return Builder(text).measure(parse_spec(text), nodes);
}

}  // namespace freelab
