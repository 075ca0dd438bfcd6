#pragma once

#include <string>
#include <vector>

namespace qham {

// Automorphism of a finite group as the permutation of element indices.
using Perm = std::vector<int>;

// Finite group given by a Cayley table over element indices.
class FiniteGroup {
 public:
  FiniteGroup(std::vector<std::string> names, std::vector<std::vector<int>> table);

  static FiniteGroup cyclic(int n);
  // Permutations of {0,1,2}; index 0 is the identity.
  static FiniteGroup symmetric3();

  // Cayley-table JSON: {elements: [names], table: [[index]], gamma_images: [[index]]}.
  // gamma_images is optional and is returned through *gamma_images.
  static FiniteGroup from_json_text(const std::string& text, std::vector<Perm>* gamma_images = nullptr);
  static FiniteGroup from_json_file(const std::string& path, std::vector<Perm>* gamma_images = nullptr);

  int order() const { return static_cast<int>(names_.size()); }
  int identity() const { return e_; }
  int mul(int a, int b) const { return table_[a][b]; }
  int inv(int a) const { return inv_[a]; }
  const std::string& name(int a) const { return names_[a]; }

  bool is_automorphism(const Perm& p) const;
  Perm inner_aut(int w) const;  // x -> w x w^{-1}
  Perm inversion_map() const;   // an automorphism only for abelian groups
  Perm identity_aut() const;
  static Perm compose(const Perm& a, const Perm& b);  // a o b
  static Perm invert(const Perm& a);
  static int order_of(const Perm& a);

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<int>> table_;
  std::vector<int> inv_;
  int e_ = 0;
};

struct FiniteOps {
  using Elem = int;
  using Aut = Perm;

  const FiniteGroup* G = nullptr;

  int identity() const { return G->identity(); }
  int mul(int a, int b) const { return G->mul(a, b); }
  int inv(int a) const { return G->inv(a); }
  int apply(const Perm& k, int a) const { return k.empty() ? a : k[a]; }
  Perm id_aut() const { return Perm(); }
  Perm compose(const Perm& a, const Perm& b) const;
  Perm aut_inv(const Perm& a) const { return a.empty() ? a : FiniteGroup::invert(a); }
  double dist(int a, int b) const { return a == b ? 0.0 : 1.0; }
};

}  // namespace qham
