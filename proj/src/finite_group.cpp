#include "qham/finite_group.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qham {

FiniteGroup::FiniteGroup(std::vector<std::string> names, std::vector<std::vector<int>> table)
    : names_(std::move(names)), table_(std::move(table)) {
  const int n = order();
  if (n == 0) throw std::invalid_argument("finite group: empty element list");
  if (static_cast<int>(table_.size()) != n) throw std::invalid_argument("finite group: table has wrong row count");
  for (const auto& row : table_) {
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("finite group: table row has wrong length");
    for (int v : row)
      if (v < 0 || v >= n) throw std::invalid_argument("finite group: table entry out of range");
  }
  e_ = -1;
  for (int a = 0; a < n && e_ < 0; ++a) {
    bool ok = true;
    for (int x = 0; x < n && ok; ++x) ok = table_[a][x] == x && table_[x][a] == x;
    if (ok) e_ = a;
  }
  if (e_ < 0) throw std::invalid_argument("finite group: no identity element");
  inv_.assign(n, -1);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (table_[a][b] == e_ && table_[b][a] == e_) inv_[a] = b;
  for (int a = 0; a < n; ++a)
    if (inv_[a] < 0) throw std::invalid_argument("finite group: element without inverse");
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
          throw std::invalid_argument("finite group: table is not associative");
}

FiniteGroup FiniteGroup::cyclic(int n) {
  std::vector<std::string> names;
  std::vector<std::vector<int>> t(n, std::vector<int>(n));
  for (int a = 0; a < n; ++a) {
    names.push_back(std::to_string(a));
    for (int b = 0; b < n; ++b) t[a][b] = (a + b) % n;
  }
  return FiniteGroup(names, t);
}

FiniteGroup FiniteGroup::symmetric3() {
  std::vector<std::array<int, 3>> perms;
  std::array<int, 3> p{0, 1, 2};
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  auto index = [&](const std::array<int, 3>& q) {
    return static_cast<int>(std::find(perms.begin(), perms.end(), q) - perms.begin());
  };
  std::vector<std::string> names;
  std::vector<std::vector<int>> t(6, std::vector<int>(6));
  for (int a = 0; a < 6; ++a) {
    names.push_back(std::to_string(perms[a][0]) + std::to_string(perms[a][1]) + std::to_string(perms[a][2]));
    for (int b = 0; b < 6; ++b) {
      std::array<int, 3> c{};
      for (int i = 0; i < 3; ++i) c[i] = perms[a][perms[b][i]];
      t[a][b] = index(c);
    }
  }
  return FiniteGroup(names, t);
}

FiniteGroup FiniteGroup::from_json_text(const std::string& text, std::vector<Perm>* gamma_images) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("finite group JSON: ") + e.what());
  }
  if (!j.contains("elements") || !j.contains("table"))
    throw std::invalid_argument("finite group JSON: needs 'elements' and 'table'");
  auto names = j.at("elements").get<std::vector<std::string>>();
  auto table = j.at("table").get<std::vector<std::vector<int>>>();
  FiniteGroup G(names, table);
  if (gamma_images) {
    gamma_images->clear();
    if (j.contains("gamma_images")) {
      for (const auto& img : j.at("gamma_images")) {
        Perm p = img.get<Perm>();
        if (!G.is_automorphism(p)) throw std::invalid_argument("finite group JSON: gamma image is not an automorphism");
        gamma_images->push_back(p);
      }
    }
  }
  return G;
}

FiniteGroup FiniteGroup::from_json_file(const std::string& path, std::vector<Perm>* gamma_images) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open finite group file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), gamma_images);
}

bool FiniteGroup::is_automorphism(const Perm& p) const {
  const int n = order();
  if (static_cast<int>(p.size()) != n) return false;
  std::vector<int> seen(n, 0);
  for (int v : p) {
    if (v < 0 || v >= n || seen[v]) return false;
    seen[v] = 1;
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (p[mul(a, b)] != mul(p[a], p[b])) return false;
  return true;
}

Perm FiniteGroup::inner_aut(int w) const {
  Perm p(order());
  for (int x = 0; x < order(); ++x) p[x] = mul(mul(w, x), inv(w));
  return p;
}

Perm FiniteGroup::inversion_map() const {
  Perm p(order());
  for (int x = 0; x < order(); ++x) p[x] = inv(x);
  return p;
}

Perm FiniteGroup::identity_aut() const {
  Perm p(order());
  std::iota(p.begin(), p.end(), 0);
  return p;
}

Perm FiniteGroup::compose(const Perm& a, const Perm& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Perm c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[b[i]];
  return c;
}

Perm FiniteGroup::invert(const Perm& a) {
  Perm c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[a[i]] = static_cast<int>(i);
  return c;
}

int FiniteGroup::order_of(const Perm& a) {
  if (a.empty()) return 1;
  Perm cur = a;
  for (int k = 1;; ++k) {
    bool id = true;
    for (std::size_t i = 0; i < cur.size() && id; ++i) id = cur[i] == static_cast<int>(i);
    if (id) return k;
    cur = compose(a, cur);
  }
}

Perm FiniteOps::compose(const Perm& a, const Perm& b) const { return FiniteGroup::compose(a, b); }

}  // namespace qham
