#include "flexlink/canonical.hpp"

#include "flexlink/errors.hpp"

#include <string>

namespace flexlink {

Eigen::VectorXd characteristic_coefficients(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("matrix must be square");
    const int n = static_cast<int>(A.rows());
    Eigen::VectorXd f(n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        const Eigen::MatrixXd AM = A * M;
        const double ck = -AM.trace() / k;
        f(n - k) = ck;
        M = AM + ck * Eigen::MatrixXd::Identity(n, n);
    }
    return f;
}

CanonicalSystem to_canonical(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                             const Eigen::MatrixXd& C) {
    if (A.rows() != A.cols() || A.rows() != B.size() || C.cols() != A.cols())
        throw std::invalid_argument("inconsistent system dimensions");
    const int m = static_cast<int>(A.rows());

    Eigen::MatrixXd W(m, m);
    W.col(0) = B;
    for (int k = 1; k < m; ++k) W.col(k) = A * W.col(k - 1);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < m; ++i)
        if (sv(i) > 1e-8 * sv(0)) ++rank;
    if (rank < m)
        throw SolverError("controllability matrix is rank-deficient (rank " +
                          std::to_string(rank) + " of " + std::to_string(m) + ")");

    // q = last row of W^{-1}; rows of T are q, qA, ..., qA^{m-1}.
    Eigen::VectorXd e_m = Eigen::VectorXd::Zero(m);
    e_m(m - 1) = 1.0;
    const Eigen::RowVectorXd q = W.transpose().partialPivLu().solve(e_m).transpose();

    CanonicalSystem sys;
    sys.T.resize(m, m);
    sys.T.row(0) = q;
    for (int k = 1; k < m; ++k) sys.T.row(k) = sys.T.row(k - 1) * A;
    sys.T_inv = sys.T.partialPivLu().inverse();

    sys.f = characteristic_coefficients(A);
    sys.A_C = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) sys.A_C(i, i + 1) = 1.0;
    sys.A_C.row(m - 1) = -sys.f.transpose();
    sys.B_C = e_m;
    sys.C_C = C * sys.T_inv;

    Eigen::JacobiSVD<Eigen::MatrixXd> tsvd(sys.T);
    sys.t_condition = tsvd.singularValues()(0) / tsvd.singularValues()(m - 1);
    return sys;
}

CanonicalSystem to_canonical(const StateSpacePlant& plant) {
    return to_canonical(plant.A, plant.B, plant.C);
}

Eigen::VectorXd transform_state(const CanonicalSystem& sys, const Eigen::VectorXd& psi) {
    if (psi.size() != sys.dim()) throw std::invalid_argument("state dimension mismatch");
    return sys.T * psi;
}

Eigen::VectorXd transform_desired(const CanonicalSystem& sys, const Eigen::VectorXd& psi_d) {
    return transform_state(sys, psi_d);
}

Eigen::VectorXd inverse_transform(const CanonicalSystem& sys, const Eigen::VectorXd& z) {
    if (z.size() != sys.dim()) throw std::invalid_argument("state dimension mismatch");
    return sys.T_inv * z;
}

namespace {
nlohmann::json matrix_rows(const Eigen::MatrixXd& mat) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
        rows.push_back(row);
    }
    return rows;
}
}  // namespace

nlohmann::json canonical_to_json(const CanonicalSystem& sys) {
    return nlohmann::json{
        {"T", matrix_rows(sys.T)},
        {"T_inv", matrix_rows(sys.T_inv)},
        {"A_C", matrix_rows(sys.A_C)},
        {"B_C", std::vector<double>(sys.B_C.data(), sys.B_C.data() + sys.B_C.size())},
        {"C_C", matrix_rows(sys.C_C)},
        {"f", std::vector<double>(sys.f.data(), sys.f.data() + sys.f.size())},
        {"t_condition", sys.t_condition}};
}

}  // namespace flexlink
