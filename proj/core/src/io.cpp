// Copyright The netred Authors
// SPDX-License-Identifier: Apache-2.0

#include "netred/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "netred/error.hpp"

namespace netred
{

std::string format_number(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

WeightedGraph SystemFile::graph() const
{
  if (grid)
  {
    return grid_graph(grid->rows, grid->cols, grid->weight);
  }
  return WeightedGraph(vertices, edges, directed);
}

namespace
{

struct Token
{
  std::string text;
  std::size_t column;  ///< 1-based
};

struct Line
{
  std::size_t number;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(const std::string &text)
{
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw))
  {
    ++number;
    if (!raw.empty() && raw.back() == '\r')
    {
      raw.pop_back();
    }
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size())
    {
      if (raw[i] == '#')
      {
        break;
      }
      if (std::isspace(static_cast<unsigned char>(raw[i])))
      {
        ++i;
        continue;
      }
      const std::size_t start = i;
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i])) && raw[i] != '#')
      {
        ++i;
      }
      line.tokens.push_back({raw.substr(start, i - start), start + 1});
    }
    if (!line.tokens.empty())
    {
      lines.push_back(std::move(line));
    }
  }
  return lines;
}

class Parser
{
public:
  explicit Parser(std::vector<Line> lines, std::size_t last_line)
    : lines_(std::move(lines)), last_line_(last_line)
  {
  }

  SystemFile run()
  {
    SystemFile sf;
    std::map<std::string, bool> seen;
    while (pos_ < lines_.size())
    {
      const Line &head = lines_[pos_];
      const Token &t = head.tokens[0];
      if (t.text.size() < 2 || t.text.front() != '[' || t.text.back() != ']' ||
          head.tokens.size() != 1)
      {
        fail(head, t, "expected a section header such as [graph]");
      }
      const std::string name = t.text.substr(1, t.text.size() - 2);
      if (seen[name])
      {
        fail(head, t, "duplicate section [" + name + "]");
      }
      seen[name] = true;
      ++pos_;
      if (name == "graph")
      {
        graph(sf);
      }
      else if (name == "inertias")
      {
        inertias(sf);
      }
      else if (name == "input")
      {
        input(sf);
      }
      else if (name == "output")
      {
        output(sf);
      }
      else if (name == "agent")
      {
        agent(sf);
      }
      else
      {
        fail(head, t, "unknown section [" + name + "]");
      }
    }
    for (const char *required : {"graph", "input", "output", "agent"})
    {
      if (!seen[required])
      {
        throw ParseError(std::string("missing section [") + required + "]", last_line_ + 1, 1);
      }
    }
    if (!seen["inertias"])
    {
      sf.uniform_inertia = 1.0;
    }
    check_dimensions(sf);
    return sf;
  }

private:
  [[noreturn]] static void fail(const Line &line, const Token &tok, const std::string &what)
  {
    throw ParseError(what, line.number, tok.column);
  }

  [[noreturn]] void fail_eol(const Line &line, const std::string &what) const
  {
    const Token &last = line.tokens.back();
    throw ParseError(what, line.number, last.column + last.text.size());
  }

  bool in_section() const
  {
    return pos_ < lines_.size() && lines_[pos_].tokens[0].text.front() != '[';
  }

  static double number(const Line &line, const Token &tok)
  {
    const char *begin = tok.text.c_str();
    char *end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
    {
      fail(line, tok, "expected a finite number, got '" + tok.text + "'");
    }
    return v;
  }

  static std::size_t count(const Line &line, const Token &tok, std::size_t min)
  {
    std::size_t v = 0;
    for (char c : tok.text)
    {
      if (!std::isdigit(static_cast<unsigned char>(c)))
      {
        fail(line, tok, "expected a non-negative integer, got '" + tok.text + "'");
      }
      v = v * 10 + static_cast<std::size_t>(c - '0');
      if (v > 1'000'000'000)
      {
        fail(line, tok, "integer out of range");
      }
    }
    if (tok.text.empty() || v < min)
    {
      fail(line, tok, "integer must be at least " + std::to_string(min));
    }
    return v;
  }

  void arity(const Line &line, std::size_t n) const
  {
    if (line.tokens.size() < n)
    {
      fail_eol(line, "'" + line.tokens[0].text + "' expects " + std::to_string(n - 1) +
                         " value(s)");
    }
    if (line.tokens.size() > n)
    {
      fail(line, line.tokens[n], "unexpected trailing value");
    }
  }

  Matrix matrix_block(const Line &head, std::size_t first)
  {
    arity(head, first + 2);
    const std::size_t rows = count(head, head.tokens[first], 0);
    const std::size_t cols = count(head, head.tokens[first + 1], 0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
    {
      if (!in_section())
      {
        const Line &ref = pos_ < lines_.size() ? lines_[pos_] : head;
        throw ParseError("expected " + std::to_string(rows) + " matrix rows", ref.number,
                         pos_ < lines_.size() ? 1 : head.tokens.back().column);
      }
      const Line &row = lines_[pos_++];
      if (row.tokens.size() != cols)
      {
        if (row.tokens.size() > cols)
        {
          fail(row, row.tokens[cols], "matrix row has too many entries");
        }
        fail_eol(row, "matrix row has " + std::to_string(row.tokens.size()) + " entries, expected " +
                          std::to_string(cols));
      }
      for (std::size_t j = 0; j < cols; ++j)
      {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(row, row.tokens[j]);
      }
    }
    return m;
  }

  void graph(SystemFile &sf)
  {
    bool have_vertices = false;
    bool have_directed = false;
    while (in_section())
    {
      const Line &line = lines_[pos_++];
      const Token &key = line.tokens[0];
      if (key.text == "vertices")
      {
        arity(line, 2);
        if (have_vertices)
        {
          fail(line, key, "duplicate key 'vertices'");
        }
        sf.vertices = count(line, line.tokens[1], 1);
        have_vertices = true;
      }
      else if (key.text == "directed")
      {
        arity(line, 2);
        const std::string &v = line.tokens[1].text;
        if (v != "true" && v != "false")
        {
          fail(line, line.tokens[1], "expected true or false");
        }
        sf.directed = v == "true";
        have_directed = true;
      }
      else if (key.text == "edge")
      {
        arity(line, 4);
        if (!have_vertices)
        {
          fail(line, key, "'vertices' must precede edges");
        }
        std::size_t s = count(line, line.tokens[1], 1);
        std::size_t t = count(line, line.tokens[2], 1);
        for (auto [v, tok] : {std::pair{s, 1}, std::pair{t, 2}})
        {
          if (v > sf.vertices)
          {
            fail(line, line.tokens[static_cast<std::size_t>(tok)], "vertex index out of range");
          }
        }
        const double w = number(line, line.tokens[3]);
        if (s == t)
        {
          fail(line, line.tokens[2], "self-loops are not allowed");
        }
        if (!(w > 0.0))
        {
          fail(line, line.tokens[3], "edge weights must be positive");
        }
        --s;
        --t;
        if (!sf.directed && s > t)
        {
          std::swap(s, t);
        }
        for (const auto &e : sf.edges)
        {
          if (e.source == s && e.target == t)
          {
            fail(line, key, "duplicate edge");
          }
        }
        sf.edges.push_back({s, t, w});
      }
      else if (key.text == "grid")
      {
        arity(line, 4);
        GridSpec g;
        g.rows = count(line, line.tokens[1], 1);
        g.cols = count(line, line.tokens[2], 1);
        g.weight = number(line, line.tokens[3]);
        if (!(g.weight > 0.0))
        {
          fail(line, line.tokens[3], "edge weights must be positive");
        }
        if (have_vertices && sf.vertices != g.rows * g.cols)
        {
          fail(line, key, "grid size does not match 'vertices'");
        }
        sf.grid = g;
        sf.vertices = g.rows * g.cols;
        have_vertices = true;
      }
      else
      {
        fail(line, key, "unknown key '" + key.text + "' in [graph]");
      }
    }
    (void)have_directed;
    if (!have_vertices)
    {
      throw ParseError("[graph] requires 'vertices' or 'grid'", last_line_ + 1, 1);
    }
    if (sf.grid && !sf.edges.empty())
    {
      throw ParseError("[graph] cannot combine 'grid' with explicit edges", last_line_ + 1, 1);
    }
  }

  void inertias(SystemFile &sf)
  {
    if (!in_section())
    {
      throw ParseError("[inertias] is empty", last_line_ + 1, 1);
    }
    const Line &line = lines_[pos_++];
    const Token &key = line.tokens[0];
    if (key.text == "uniform")
    {
      arity(line, 2);
      sf.uniform_inertia = number(line, line.tokens[1]);
      if (!(*sf.uniform_inertia > 0.0))
      {
        fail(line, line.tokens[1], "inertias must be positive");
      }
    }
    else if (key.text == "values")
    {
      if (line.tokens.size() < 2)
      {
        fail_eol(line, "'values' expects at least one entry");
      }
      sf.inertias.resize(static_cast<Eigen::Index>(line.tokens.size() - 1));
      for (std::size_t i = 1; i < line.tokens.size(); ++i)
      {
        const double v = number(line, line.tokens[i]);
        if (!(v > 0.0))
        {
          fail(line, line.tokens[i], "inertias must be positive");
        }
        sf.inertias(static_cast<Eigen::Index>(i - 1)) = v;
      }
    }
    else
    {
      fail(line, key, "unknown key '" + key.text + "' in [inertias]");
    }
    if (in_section())
    {
      fail(lines_[pos_], lines_[pos_].tokens[0], "[inertias] takes a single entry");
    }
  }

  void input(SystemFile &sf)
  {
    if (!in_section())
    {
      throw ParseError("[input] is empty", last_line_ + 1, 1);
    }
    const Line &line = lines_[pos_++];
    const Token &key = line.tokens[0];
    if (key.text == "leaders")
    {
      if (line.tokens.size() < 2)
      {
        fail_eol(line, "'leaders' expects at least one vertex");
      }
      std::vector<std::size_t> leaders;
      for (std::size_t i = 1; i < line.tokens.size(); ++i)
      {
        const std::size_t v = count(line, line.tokens[i], 1);
        if (v > sf.vertices)
        {
          fail(line, line.tokens[i], "vertex index out of range");
        }
        leaders.push_back(v - 1);
      }
      sf.leaders = std::move(leaders);
    }
    else if (key.text == "matrix")
    {
      sf.input = matrix_block(line, 1);
    }
    else
    {
      fail(line, key, "unknown key '" + key.text + "' in [input]");
    }
    if (in_section())
    {
      fail(lines_[pos_], lines_[pos_].tokens[0], "[input] takes a single entry");
    }
  }

  void output(SystemFile &sf)
  {
    if (!in_section())
    {
      throw ParseError("[output] is empty", last_line_ + 1, 1);
    }
    const Line &line = lines_[pos_++];
    const Token &key = line.tokens[0];
    if (key.text == "incidence")
    {
      arity(line, 1);
      sf.output_kind = OutputKind::incidence;
    }
    else if (key.text == "identity")
    {
      arity(line, 1);
      sf.output_kind = OutputKind::identity;
    }
    else if (key.text == "matrix")
    {
      sf.output_kind = OutputKind::matrix;
      sf.output = matrix_block(line, 1);
    }
    else
    {
      fail(line, key, "unknown key '" + key.text + "' in [output]");
    }
    if (in_section())
    {
      fail(lines_[pos_], lines_[pos_].tokens[0], "[output] takes a single entry");
    }
  }

  void agent(SystemFile &sf)
  {
    if (!in_section() || lines_[pos_].tokens[0].text != "kind")
    {
      const Line &ref = pos_ < lines_.size() ? lines_[pos_] : lines_[pos_ - 1];
      throw ParseError("[agent] must start with 'kind'", ref.number, 1);
    }
    const Line &head = lines_[pos_++];
    arity(head, 2);
    const std::string &kind = head.tokens[1].text;
    if (kind == "single_integrator")
    {
      sf.agent_kind = AgentKind::single_integrator;
      sf.agent = AgentDynamics::single_integrator();
      if (in_section())
      {
        fail(lines_[pos_], lines_[pos_].tokens[0], "single_integrator takes no parameters");
      }
    }
    else if (kind == "linear")
    {
      sf.agent_kind = AgentKind::linear;
      std::map<std::string, Matrix> mats;
      while (in_section())
      {
        const Line &line = lines_[pos_++];
        const Token &key = line.tokens[0];
        if (key.text != "E" && key.text != "A" && key.text != "B" && key.text != "C" &&
            key.text != "K")
        {
          fail(line, key, "unknown key '" + key.text + "' in linear agent");
        }
        if (mats.count(key.text) != 0)
        {
          fail(line, key, "duplicate matrix '" + key.text + "'");
        }
        mats[key.text] = matrix_block(line, 1);
      }
      for (const char *name : {"E", "A", "B", "C", "K"})
      {
        if (mats.count(name) == 0)
        {
          throw ParseError(std::string("linear agent is missing matrix ") + name, head.number, 1);
        }
      }
      sf.agent = {mats["E"], mats["A"], mats["B"], mats["C"], mats["K"]};
    }
    else if (kind == "vanderpol")
    {
      sf.agent_kind = AgentKind::vanderpol;
      while (in_section())
      {
        const Line &line = lines_[pos_++];
        const Token &key = line.tokens[0];
        arity(line, 2);
        const double v = number(line, line.tokens[1]);
        if (key.text == "mu")
        {
          sf.vanderpol.mu = v;
        }
        else if (key.text == "sigma")
        {
          sf.vanderpol.sigma = v;
        }
        else if (key.text == "c")
        {
          sf.vanderpol.c = v;
        }
        else
        {
          fail(line, key, "unknown key '" + key.text + "' in vanderpol agent");
        }
      }
    }
    else
    {
      fail(head, head.tokens[1], "unknown agent kind '" + kind + "'");
    }
  }

  void check_dimensions(const SystemFile &sf) const
  {
    const auto n = static_cast<Eigen::Index>(sf.vertices);
    if (!sf.uniform_inertia && sf.inertias.size() != n)
    {
      throw ParseError("[inertias] has " + std::to_string(sf.inertias.size()) +
                           " values for " + std::to_string(n) + " vertices",
                       last_line_ + 1, 1);
    }
    if (!sf.leaders && sf.input.rows() != n)
    {
      throw ParseError("[input] matrix must have one row per vertex", last_line_ + 1, 1);
    }
    if (sf.output_kind == OutputKind::matrix && sf.output.cols() != n)
    {
      throw ParseError("[output] matrix must have one column per vertex", last_line_ + 1, 1);
    }
    if (sf.output_kind == OutputKind::incidence && sf.directed)
    {
      throw ParseError("incidence output requires an undirected graph", last_line_ + 1, 1);
    }
  }

  std::vector<Line> lines_;
  std::size_t last_line_;
  std::size_t pos_ = 0;
};

void write_matrix(std::ostream &os, const std::string &head, const Matrix &m)
{
  os << head << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
    {
      os << (j == 0 ? "" : " ") << format_number(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace

SystemFile parse_system(const std::string &text)
{
  std::size_t last = 0;
  for (char c : text)
  {
    last += c == '\n' ? 1 : 0;
  }
  SystemFile sf = Parser(tokenize(text), last).run();
  try
  {
    (void)sf.graph();
  }
  catch (const InvalidArgument &e)
  {
    throw ParseError(e.what(), 1, 1);
  }
  return sf;
}

SystemFile read_system_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ParseError("cannot open '" + path + "'", 0, 0);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

std::string write_system(const SystemFile &sf)
{
  std::ostringstream os;
  os << "[graph]\n";
  if (sf.grid)
  {
    os << "grid " << sf.grid->rows << ' ' << sf.grid->cols << ' ' << format_number(sf.grid->weight)
       << '\n';
  }
  else
  {
    os << "vertices " << sf.vertices << '\n';
    os << "directed " << (sf.directed ? "true" : "false") << '\n';
    for (const auto &e : sf.edges)
    {
      os << "edge " << e.source + 1 << ' ' << e.target + 1 << ' ' << format_number(e.weight) << '\n';
    }
  }
  os << "\n[inertias]\n";
  if (sf.uniform_inertia)
  {
    os << "uniform " << format_number(*sf.uniform_inertia) << '\n';
  }
  else
  {
    os << "values";
    for (Eigen::Index i = 0; i < sf.inertias.size(); ++i)
    {
      os << ' ' << format_number(sf.inertias(i));
    }
    os << '\n';
  }
  os << "\n[input]\n";
  if (sf.leaders)
  {
    os << "leaders";
    for (auto v : *sf.leaders)
    {
      os << ' ' << v + 1;
    }
    os << '\n';
  }
  else
  {
    write_matrix(os, "matrix", sf.input);
  }
  os << "\n[output]\n";
  switch (sf.output_kind)
  {
  case OutputKind::incidence:
    os << "incidence\n";
    break;
  case OutputKind::identity:
    os << "identity\n";
    break;
  case OutputKind::matrix:
    write_matrix(os, "matrix", sf.output);
    break;
  }
  os << "\n[agent]\n";
  switch (sf.agent_kind)
  {
  case AgentKind::single_integrator:
    os << "kind single_integrator\n";
    break;
  case AgentKind::linear:
    os << "kind linear\n";
    write_matrix(os, "E", sf.agent.e);
    write_matrix(os, "A", sf.agent.a);
    write_matrix(os, "B", sf.agent.b);
    write_matrix(os, "C", sf.agent.c);
    write_matrix(os, "K", sf.agent.k);
    break;
  case AgentKind::vanderpol:
    os << "kind vanderpol\n";
    os << "mu " << format_number(sf.vanderpol.mu) << '\n';
    os << "sigma " << format_number(sf.vanderpol.sigma) << '\n';
    os << "c " << format_number(sf.vanderpol.c) << '\n';
    break;
  }
  return os.str();
}

SystemFile system_file_from(const LinearMas &sys)
{
  SystemFile sf;
  sf.vertices = sys.n_agents();
  sf.directed = sys.graph.directed();
  sf.edges = sys.graph.edges();
  sf.inertias = sys.inertias;
  sf.input = sys.input;
  sf.output_kind = OutputKind::matrix;
  sf.output = sys.output;
  sf.agent_kind = AgentKind::linear;
  sf.agent = sys.agent;
  return sf;
}

namespace
{

Vector inertia_vector(const SystemFile &sf)
{
  if (sf.uniform_inertia)
  {
    return Vector::Constant(static_cast<Eigen::Index>(sf.vertices), *sf.uniform_inertia);
  }
  return sf.inertias;
}

Matrix input_matrix(const SystemFile &sf)
{
  return sf.leaders ? leader_follower_input(sf.vertices, *sf.leaders) : sf.input;
}

Matrix output_matrix(const SystemFile &sf, const WeightedGraph &g)
{
  switch (sf.output_kind)
  {
  case OutputKind::incidence:
    return incidence_output(g);
  case OutputKind::identity:
    return Matrix::Identity(static_cast<Eigen::Index>(sf.vertices),
                            static_cast<Eigen::Index>(sf.vertices));
  case OutputKind::matrix:
    return sf.output;
  }
  return {};
}

}  // namespace

LinearMas to_linear(const SystemFile &sf)
{
  if (sf.agent_kind == AgentKind::vanderpol)
  {
    throw InvalidArgument("to_linear: Van der Pol agents are nonlinear");
  }
  LinearMas sys;
  sys.graph = sf.graph();
  sys.inertias = inertia_vector(sf);
  sys.input = input_matrix(sf);
  sys.output = output_matrix(sf, sys.graph);
  sys.agent = sf.agent_kind == AgentKind::linear ? sf.agent : AgentDynamics::single_integrator();
  return sys;
}

NonlinearMas to_nonlinear(const SystemFile &sf)
{
  if (sf.agent_kind != AgentKind::vanderpol)
  {
    return linear_instantiation(to_linear(sf));
  }
  NonlinearMas sys;
  sys.graph = sf.graph();
  sys.inertias = inertia_vector(sf);
  sys.input = input_matrix(sf);
  sys.output = output_matrix(sf, sys.graph);
  sys.agent = vanderpol_agent(sf.vanderpol);
  sys.self_weights = Vector::Zero(static_cast<Eigen::Index>(sf.vertices));
  return sys;
}

void write_ranked_csv(std::ostream &os, const std::vector<RankedPartition> &rows)
{
  os << "rank,rel_error,partition\n";
  for (const auto &row : rows)
  {
    os << row.rank << ',' << format_number(row.relative_error) << ",\"" << row.partition.to_string()
       << "\"\n";
  }
}

void write_trajectory_csv(std::ostream &os, const OdeSolution &sol, std::size_t agent_order)
{
  if (agent_order == 0)
  {
    throw InvalidArgument("write_trajectory_csv: agent order must be positive");
  }
  const std::size_t dim = sol.states.empty() ? 0 : static_cast<std::size_t>(sol.states[0].size());
  os << 't';
  for (std::size_t k = 0; k < dim; ++k)
  {
    os << ",x_" << k / agent_order + 1 << '_' << k % agent_order + 1;
  }
  os << '\n';
  for (std::size_t i = 0; i < sol.times.size(); ++i)
  {
    os << format_number(sol.times[i]);
    for (Eigen::Index k = 0; k < sol.states[i].size(); ++k)
    {
      os << ',' << format_number(sol.states[i](k));
    }
    os << '\n';
  }
}

void write_singular_values_csv(std::ostream &os, const Vector &sigma)
{
  os << "index,sigma\n";
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
  {
    os << i + 1 << ',' << format_number(sigma(i)) << '\n';
  }
}

namespace
{

using Fn = std::function<double(double)>;

class ExprParser
{
public:
  explicit ExprParser(std::string text) : s_(std::move(text)) {}

  Fn parse()
  {
    Fn f = expr();
    skip();
    if (i_ != s_.size())
    {
      error("unexpected '" + std::string(1, s_[i_]) + "'");
    }
    return f;
  }

private:
  [[noreturn]] void error(const std::string &what) const
  {
    throw ParseError("input expression: " + what, 1, i_ + 1);
  }

  void skip()
  {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
    {
      ++i_;
    }
  }

  bool accept(char c)
  {
    skip();
    if (i_ < s_.size() && s_[i_] == c)
    {
      ++i_;
      return true;
    }
    return false;
  }

  Fn expr()
  {
    Fn lhs = term();
    for (;;)
    {
      if (accept('+'))
      {
        lhs = [a = lhs, b = term()](double t) { return a(t) + b(t); };
      }
      else if (accept('-'))
      {
        lhs = [a = lhs, b = term()](double t) { return a(t) - b(t); };
      }
      else
      {
        return lhs;
      }
    }
  }

  Fn term()
  {
    Fn lhs = unary();
    for (;;)
    {
      if (accept('*'))
      {
        lhs = [a = lhs, b = unary()](double t) { return a(t) * b(t); };
      }
      else if (accept('/'))
      {
        lhs = [a = lhs, b = unary()](double t) { return a(t) / b(t); };
      }
      else
      {
        return lhs;
      }
    }
  }

  Fn unary()
  {
    if (accept('-'))
    {
      return [a = unary()](double t) { return -a(t); };
    }
    if (accept('+'))
    {
      return unary();
    }
    return power();
  }

  Fn power()
  {
    Fn base = primary();
    if (accept('^'))
    {
      return [a = base, b = unary()](double t) { return std::pow(a(t), b(t)); };
    }
    return base;
  }

  Fn primary()
  {
    skip();
    if (i_ >= s_.size())
    {
      error("unexpected end of expression");
    }
    if (accept('('))
    {
      Fn inner = expr();
      if (!accept(')'))
      {
        error("expected ')'");
      }
      return inner;
    }
    const char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
    {
      const char *begin = s_.c_str() + i_;
      char *end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin)
      {
        error("malformed number");
      }
      i_ += static_cast<std::size_t>(end - begin);
      return [v](double) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c)))
    {
      const std::size_t start = i_;
      while (i_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_])))
      {
        ++i_;
      }
      const std::string name = s_.substr(start, i_ - start);
      if (name == "t")
      {
        return [](double t) { return t; };
      }
      if (name == "pi")
      {
        return [](double) { return std::numbers::pi; };
      }
      if (name == "e")
      {
        return [](double) { return std::numbers::e; };
      }
      static const std::map<std::string, double (*)(double)> functions = {
          {"exp", [](double x) { return std::exp(x); }},
          {"sin", [](double x) { return std::sin(x); }},
          {"cos", [](double x) { return std::cos(x); }},
          {"tan", [](double x) { return std::tan(x); }},
          {"tanh", [](double x) { return std::tanh(x); }},
          {"sqrt", [](double x) { return std::sqrt(x); }},
          {"log", [](double x) { return std::log(x); }},
          {"abs", [](double x) { return std::abs(x); }},
      };
      const auto it = functions.find(name);
      if (it == functions.end())
      {
        i_ = start;
        error("unknown identifier '" + name + "'");
      }
      if (!accept('('))
      {
        error("expected '(' after " + name);
      }
      Fn arg = expr();
      if (!accept(')'))
      {
        error("expected ')'");
      }
      return [f = it->second, a = arg](double t) { return f(a(t)); };
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  std::string s_;
  std::size_t i_ = 0;
};

}  // namespace

InputSignal parse_input_expression(const std::string &text, std::size_t channels)
{
  std::vector<Fn> parts;
  std::size_t start = 0;
  for (;;)
  {
    const std::size_t semi = text.find(';', start);
    parts.push_back(ExprParser(text.substr(start, semi - start)).parse());
    if (semi == std::string::npos)
    {
      break;
    }
    start = semi + 1;
  }
  if (parts.size() != 1 && parts.size() != channels)
  {
    throw ParseError("input expression has " + std::to_string(parts.size()) +
                         " channels, expected " + std::to_string(channels),
                     1, 1);
  }
  return [parts, channels](double t) {
    Vector u(static_cast<Eigen::Index>(channels));
    for (std::size_t k = 0; k < channels; ++k)
    {
      u(static_cast<Eigen::Index>(k)) = parts.size() == 1 ? parts[0](t) : parts[k](t);
    }
    return u;
  };
}

}  // namespace netred
