#pragma once

#include <memory>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "errors.hpp"

namespace barons2d {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;
using Vec = Eigen::VectorXd;

/// Systems with at most this many unknowns per field are factorized directly.
inline constexpr long kDirectSolveLimit = 128L * 128L;

/// Solver for a sequence of nonsymmetric systems that share one sparsity
/// pattern. Direct LU for small systems, BiCGSTAB with ILUT otherwise.
class GeneralSolver {
public:
    explicit GeneralSolver(bool direct, double rel_tol = 1e-10) : direct_(direct), tol_(rel_tol) {}

    void factorize(const SparseMatrix& a) {
        if (direct_) {
            if (!analyzed_) {
                lu_.analyzePattern(a);
                analyzed_ = true;
            }
            lu_.factorize(a);
            if (lu_.info() != Eigen::Success) throw SolverBreakdown("sparse LU factorization failed");
        } else {
            it_.setTolerance(tol_);
            it_.setMaxIterations(2000);
            it_.preconditioner().setDroptol(1e-6);
            it_.preconditioner().setFillfactor(10);
            it_.compute(a);
            if (it_.info() != Eigen::Success) throw SolverBreakdown("ILUT preconditioner setup failed");
        }
    }

    Vec solve(const Vec& b, const Vec* guess = nullptr) const {
        if (direct_) {
            Vec x = lu_.solve(b);
            if (lu_.info() != Eigen::Success) throw SolverBreakdown("sparse LU solve failed");
            return x;
        }
        Vec x = guess ? Vec(it_.solveWithGuess(b, *guess)) : Vec(it_.solve(b));
        if (it_.info() != Eigen::Success)
            throw SolverBreakdown("BiCGSTAB stagnated (relative error " + std::to_string(it_.error()) + ")");
        return x;
    }

private:
    bool direct_;
    double tol_;
    bool analyzed_ = false;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double, int>> it_;
};

/// Solver for symmetric positive definite systems sharing one pattern.
/// Sparse LDL^T for small systems, conjugate gradients with incomplete
/// Cholesky otherwise.
class SpdSolver {
public:
    explicit SpdSolver(bool direct, double rel_tol = 1e-12) : direct_(direct), tol_(rel_tol) {}

    void factorize(const SparseMatrix& a) {
        if (direct_) {
            if (!analyzed_) {
                ldlt_.analyzePattern(a);
                analyzed_ = true;
            }
            ldlt_.factorize(a);
            if (ldlt_.info() != Eigen::Success) throw SolverBreakdown("sparse LDLT factorization failed");
        } else {
            cg_.setTolerance(tol_);
            cg_.setMaxIterations(5000);
            cg_.compute(a);
            if (cg_.info() != Eigen::Success) throw SolverBreakdown("incomplete Cholesky setup failed");
        }
    }

    Vec solve(const Vec& b, const Vec* guess = nullptr) const {
        if (direct_) {
            Vec x = ldlt_.solve(b);
            if (ldlt_.info() != Eigen::Success) throw SolverBreakdown("sparse LDLT solve failed");
            return x;
        }
        Vec x = guess ? Vec(cg_.solveWithGuess(b, *guess)) : Vec(cg_.solve(b));
        if (cg_.info() != Eigen::Success)
            throw SolverBreakdown("conjugate gradients stagnated (relative error " + std::to_string(cg_.error()) + ")");
        return x;
    }

private:
    bool direct_;
    double tol_;
    bool analyzed_ = false;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>> cg_;
};

}  // namespace barons2d
