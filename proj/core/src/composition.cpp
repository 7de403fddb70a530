#include "paragram/composition.hpp"

#include <istream>
#include <ostream>

#include "paragram/error.hpp"
#include "paragram/text.hpp"

namespace paragram {

ParseTree ParseTree::leaf(std::string token) {
  if (token.empty()) throw DataError("empty leaf token");
  ParseTree t;
  t.nodes_.push_back(Node{std::move(token), -1, -1});
  return t;
}

ParseTree ParseTree::join(const ParseTree& left, const ParseTree& right) {
  ParseTree t;
  t.nodes_.reserve(left.nodes_.size() + right.nodes_.size() + 1);
  t.nodes_ = left.nodes_;
  const auto offset = static_cast<std::int32_t>(left.nodes_.size());
  for (Node n : right.nodes_) {
    if (!n.is_leaf()) {
      n.left += offset;
      n.right += offset;
    }
    t.nodes_.push_back(std::move(n));
  }
  t.nodes_.push_back(Node{"", offset - 1, static_cast<std::int32_t>(t.nodes_.size()) - 1});
  return t;
}

ParseTree ParseTree::right_branching(std::span<const std::string> tokens) {
  if (tokens.empty()) throw DataError("cannot build a tree from an empty phrase");
  ParseTree t = leaf(tokens.back());
  for (std::size_t i = tokens.size() - 1; i-- > 0;) t = join(leaf(tokens[i]), t);
  return t;
}

std::vector<std::string> ParseTree::leaves() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    if (n.is_leaf()) out.push_back(n.token);
  }
  return out;
}

std::string ParseTree::surface() const {
  auto l = leaves();
  return paragram::join(l);
}

std::string ParseTree::to_string() const {
  std::vector<std::string> text(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    text[i] = n.is_leaf() ? n.token : "( " + text[n.left] + " " + text[n.right] + " )";
  }
  return text.back();
}

namespace {

std::vector<std::string> tree_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (c == '(' || c == ')') {
      flush();
      out.emplace_back(1, c);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

class TreeParser {
 public:
  explicit TreeParser(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {}

  ParseTree parse() {
    if (tokens_.empty()) throw DataError("empty tree");
    ParseTree t = parse_subtree();
    if (pos_ != tokens_.size()) throw DataError("unbalanced parentheses: trailing input");
    return t;
  }

 private:
  ParseTree parse_subtree() {
    if (pos_ >= tokens_.size()) throw DataError("unbalanced parentheses: unexpected end");
    const std::string& tok = tokens_[pos_++];
    if (tok == ")") throw DataError("unbalanced parentheses: unexpected ')'");
    if (tok != "(") return ParseTree::leaf(tok);
    std::vector<ParseTree> children;
    while (true) {
      if (pos_ >= tokens_.size()) throw DataError("unbalanced parentheses: missing ')'");
      if (tokens_[pos_] == ")") {
        ++pos_;
        break;
      }
      children.push_back(parse_subtree());
    }
    if (children.size() != 2) {
      throw DataError("node arity " + std::to_string(children.size()));
    }
    return ParseTree::join(children[0], children[1]);
  }

  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseTree parse_tree_text(std::string_view text) {
  return TreeParser(tree_tokens(text)).parse();
}

ParseTree parse_phrase(std::string_view text) {
  std::size_t first = text.find_first_not_of(" \t");
  if (first != std::string_view::npos && text[first] == '(') return parse_tree_text(text);
  auto tokens = split_whitespace(text);
  if (tokens.empty()) throw DataError("empty phrase");
  return ParseTree::right_branching(tokens);
}

CompositionParams CompositionParams::zeros(Eigen::Index n) {
  return {Eigen::MatrixXd::Zero(n, 2 * n), Vector::Zero(n)};
}

CompositionParams CompositionParams::averaging(Eigen::Index n) {
  CompositionParams p = zeros(n);
  p.W.leftCols(n).diagonal().setConstant(0.5);
  p.W.rightCols(n).diagonal().setConstant(0.5);
  return p;
}

void CompositionParams::validate() const {
  if (W.rows() != b.size() || W.cols() != 2 * b.size()) {
    throw DataError("composition matrix is " + std::to_string(W.rows()) + "x" +
                    std::to_string(W.cols()) + " for offset of length " + std::to_string(b.size()));
  }
  if (!W.allFinite() || !b.allFinite()) throw DataError("composition parameters are not finite");
}

void save_params(const CompositionParams& params, std::ostream& out) {
  params.validate();
  out << params.W.rows() << ' ' << params.W.cols() << '\n';
  for (Eigen::Index r = 0; r < params.W.rows(); ++r) {
    for (Eigen::Index c = 0; c < params.W.cols(); ++c) {
      if (c > 0) out << ' ';
      out << format_real(params.W(r, c));
    }
    out << '\n';
  }
  for (Eigen::Index i = 0; i < params.b.size(); ++i) {
    if (i > 0) out << ' ';
    out << format_real(params.b(i));
  }
  out << '\n';
  if (!out) throw DataError("write failed");
}

void save_params_file(const CompositionParams& params, const std::filesystem::path& path) {
  auto out = open_output(path);
  save_params(params, out);
}

CompositionParams load_params(std::istream& in) {
  std::string line;
  std::vector<std::vector<std::string>> lines;
  while (read_line(in, line)) {
    auto fields = split_whitespace(line);
    if (!fields.empty()) lines.push_back(std::move(fields));
  }
  if (lines.empty()) throw DataError("empty composition parameter file");
  if (lines[0].size() != 2) throw DataError("composition header must be `n 2n`");
  const auto n = parse_integer(lines[0][0], "composition header");
  const auto cols = parse_integer(lines[0][1], "composition header");
  if (n <= 0 || cols != 2 * n) throw DataError("composition header must be `n 2n`");
  if (static_cast<long long>(lines.size()) != n + 2) {
    throw DataError("composition file must have " + std::to_string(n + 2) + " non-empty lines");
  }
  CompositionParams p = CompositionParams::zeros(n);
  for (long long r = 0; r < n; ++r) {
    const auto& f = lines[r + 1];
    if (static_cast<long long>(f.size()) != cols) throw DataError("composition row has wrong length");
    for (long long c = 0; c < cols; ++c) p.W(r, c) = parse_real(f[c], "composition matrix");
  }
  const auto& bias = lines.back();
  if (static_cast<long long>(bias.size()) != n) throw DataError("composition offset has wrong length");
  for (long long i = 0; i < n; ++i) p.b(i) = parse_real(bias[i], "composition offset");
  return p;
}

CompositionParams load_params_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_params(in);
}

Vector compose_additive(std::span<const std::string> tokens, const EmbeddingSet& set) {
  if (tokens.empty()) throw DataError("cannot compose an empty phrase");
  Vector sum = Vector::Zero(set.dim());
  for (const auto& t : tokens) sum += set.lookup(t);
  return sum;
}

std::vector<Vector> forward_rnn(const ParseTree& tree, const CompositionParams& params,
                                const EmbeddingSet& set) {
  const auto& nodes = tree.nodes();
  const Eigen::Index n = set.dim();
  if (!tree.is_leaf() && (params.W.rows() != n || params.W.cols() != 2 * n || params.b.size() != n)) {
    throw DataError("composition parameters do not match embedding dimension " + std::to_string(n));
  }
  std::vector<Vector> g(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    if (node.is_leaf()) {
      g[i] = set.lookup(node.token);
    } else {
      Vector z = params.b;
      z.noalias() += params.W.leftCols(n) * g[node.left];
      z.noalias() += params.W.rightCols(n) * g[node.right];
      g[i] = z.array().tanh().matrix();
    }
  }
  return g;
}

Vector compose_rnn(const ParseTree& tree, const CompositionParams& params, const EmbeddingSet& set) {
  return std::move(forward_rnn(tree, params, set).back());
}

}  // namespace paragram
