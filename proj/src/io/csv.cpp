#include "wassbary/io.hpp"

namespace wassbary::io {

namespace {

void row(std::string& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
}

std::string quoted(const std::string& s) {
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::string trace_csv(const DescentTrace& trace) {
  std::string out = "iteration,objective,grad_sq,delta\n";
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& r = trace.records[k];
    row(out, {std::to_string(k), format_number(r.objective), format_number(r.grad_sq), format_number(r.delta)});
  }
  return out;
}

std::string grid_csv(const GridDensity& g) {
  std::string out;
  for (int a = 0; a < g.dim(); ++a) out += "x" + std::to_string(a) + ",";
  out += "value\n";
  for (std::size_t c = 0; c < g.num_cells(); ++c) {
    const Vector x = g.cell_center(c);
    for (int a = 0; a < g.dim(); ++a) out += format_number(x[a]) + ",";
    out += format_number(g.values()[c]) + "\n";
  }
  return out;
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? "," : "") + format_number(m(r, c));
    out += "\n";
  }
  return out;
}

std::string displacement_csv(const TransportMap& t, const Matrix& nodes) {
  const int d = t.dim();
  Matrix m(nodes.rows(), 2 * d);
  for (Eigen::Index r = 0; r < nodes.rows(); ++r) {
    const Vector x = nodes.row(r).transpose();
    m.row(r) << x.transpose(), (t(x) - x).transpose();
  }
  std::vector<std::string> header;
  for (int a = 0; a < d; ++a) header.push_back("x" + std::to_string(a));
  for (int a = 0; a < d; ++a) header.push_back("dx" + std::to_string(a));
  return matrix_csv(m, header);
}

std::string experiment_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "n,tau,sigma,replicate,d_lambda,sup_Tinv_err,sup_T_err,reg_dist,iters,converged,status\n";
  for (const auto& r : rows)
    row(out, {std::to_string(r.n), format_number(r.tau), format_number(r.sigma), std::to_string(r.replicate),
              format_number(r.d_lambda), format_number(r.sup_Tinv_err), format_number(r.sup_T_err),
              format_number(r.reg_dist), std::to_string(r.iters), r.converged ? "true" : "false", quoted(r.status)});
  return out;
}

std::string assignment_csv(const Assignment& a) {
  std::string out = "source_index,target_index\n";
  for (std::size_t i = 0; i < a.target_index().size(); ++i)
    out += std::to_string(i) + "," + std::to_string(a.target_index()[i]) + "\n";
  return out;
}

}  // namespace wassbary::io
