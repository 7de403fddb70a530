#ifndef PARAGRAM_COMPOSITION_HPP_
#define PARAGRAM_COMPOSITION_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paragram/embeddings.hpp"

namespace paragram {

// Binarized parse tree stored as a flat post-order node list; the root is
// the last node. Leaves carry tokens, internal nodes carry child indices.
class ParseTree {
 public:
  struct Node {
    std::string token;
    std::int32_t left = -1;
    std::int32_t right = -1;

    bool is_leaf() const noexcept { return left < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  static ParseTree leaf(std::string token);
  static ParseTree join(const ParseTree& left, const ParseTree& right);
  // ((t1 (t2 (... tn)))); the only binary tree for a bigram.
  static ParseTree right_branching(std::span<const std::string> tokens);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t root() const noexcept { return nodes_.size() - 1; }
  bool is_leaf() const noexcept { return nodes_.size() == 1; }

  std::vector<std::string> leaves() const;
  // Leaves joined by single spaces.
  std::string surface() const;
  // Parenthesized form accepted by parse_tree_text.
  std::string to_string() const;

  friend bool operator==(const ParseTree&, const ParseTree&) = default;

 private:
  std::vector<Node> nodes_;
};

// `token` is a leaf; `( T T )` is a node. Parentheses need not be separated
// from tokens by whitespace. Throws DataError.
ParseTree parse_tree_text(std::string_view text);

// A field that starts with '(' is a tree, anything else a token sequence
// turned into a right-branching tree.
ParseTree parse_phrase(std::string_view text);

// Composition matrix W (n x 2n) and offset b (n); activation is tanh.
struct CompositionParams {
  Eigen::MatrixXd W;
  Vector b;

  static CompositionParams zeros(Eigen::Index n);
  // W = [0.5 I, 0.5 I], b = 0: starts out as tanh of the child average.
  static CompositionParams averaging(Eigen::Index n);

  Eigen::Index dim() const noexcept { return b.size(); }
  // Throws DataError on a shape mismatch or non-finite entry.
  void validate() const;
};

// `n 2n` header, n rows of W, then b on one line.
void save_params(const CompositionParams& params, std::ostream& out);
void save_params_file(const CompositionParams& params, const std::filesystem::path& path);
CompositionParams load_params(std::istream& in);
CompositionParams load_params_file(const std::filesystem::path& path);

// Sum of the tokens' lookup vectors.
Vector compose_additive(std::span<const std::string> tokens, const EmbeddingSet& set);

// Activations of every node of `tree`, in the tree's post-order.
std::vector<Vector> forward_rnn(const ParseTree& tree, const CompositionParams& params,
                                const EmbeddingSet& set);

// g(leaf) = lookup(token); g(node) = tanh(W [g(left); g(right)] + b).
Vector compose_rnn(const ParseTree& tree, const CompositionParams& params,
                   const EmbeddingSet& set);

}  // namespace paragram

#endif  // PARAGRAM_COMPOSITION_HPP_
