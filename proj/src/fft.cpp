#include "pvn/fft.hpp"

#include "pvn/simd/kernels.hpp"

#include <fftw3.h>

#include <mutex>

namespace pvn::fft {
namespace {

// FFTW's planner is not reentrant; execution of an existing plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class Plan {
public:
    explicit Plan(fftw_plan p) : plan_(p) {
        if (plan_ == nullptr) {
            throw std::runtime_error("FFTW failed to create a plan");
        }
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    ~Plan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_;
};

fftw_complex* as_fftw(cd* p) { return reinterpret_cast<fftw_complex*>(p); }

int sign_of(Direction dir) { return dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD; }

constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

void transform(std::span<cd> data, Direction dir) {
    if (data.empty()) {
        return;
    }
    const auto make = [&] {
        std::lock_guard lock(planner_mutex());
        return fftw_plan_dft_1d(static_cast<int>(data.size()), as_fftw(data.data()), as_fftw(data.data()),
                                sign_of(dir), kFlags);
    };
    Plan(make()).execute();
}

void transform_rows(CMatrix& m, Direction dir) {
    if (m.size() == 0) {
        return;
    }
    const int n = static_cast<int>(m.cols());
    const int howmany = static_cast<int>(m.rows());
    const auto make = [&] {
        std::lock_guard lock(planner_mutex());
        return fftw_plan_many_dft(1, &n, howmany, as_fftw(m.data()), nullptr, 1, n, as_fftw(m.data()), nullptr, 1, n,
                                  sign_of(dir), kFlags);
    };
    Plan(make()).execute();
}

CMatrix real_forward_2d(const RMatrix& input, Eigen::Index rows, Eigen::Index cols) {
    if (input.rows() > rows || input.cols() > cols) {
        throw std::invalid_argument("padded size smaller than input");
    }
    const Eigen::Index half = cols / 2 + 1;
    const Eigen::Index used_rows = input.rows();

    // Stage 1: real-to-complex along subcarriers for the rows that carry data.
    RMatrix padded = RMatrix::Zero(used_rows, cols);
    padded.leftCols(input.cols()) = input;
    CMatrix stage(rows, half);
    stage.setZero();
    if (used_rows > 0) {
        const int n = static_cast<int>(cols);
        const int howmany = static_cast<int>(used_rows);
        const int out_dist = static_cast<int>(half);
        const auto make = [&] {
            std::lock_guard lock(planner_mutex());
            return fftw_plan_many_dft_r2c(1, &n, howmany, padded.data(), nullptr, 1, n, as_fftw(stage.data()), nullptr,
                                          1, out_dist, kFlags);
        };
        Plan(make()).execute();
    }

    // Stage 2: complex transform down each retained column.
    {
        const int n = static_cast<int>(rows);
        const int howmany = static_cast<int>(half);
        const int stride = static_cast<int>(half);
        const auto make = [&] {
            std::lock_guard lock(planner_mutex());
            return fftw_plan_many_dft(1, &n, howmany, as_fftw(stage.data()), nullptr, stride, 1, as_fftw(stage.data()),
                                      nullptr, stride, 1, FFTW_FORWARD, kFlags);
        };
        Plan(make()).execute();
    }

    // Hermitian symmetry of a real input fills the remaining columns.
    CMatrix grid(rows, cols);
    for (Eigen::Index k = 0; k < rows; ++k) {
        grid.row(k).head(half) = stage.row(k);
        const Eigen::Index mirror_k = (rows - k) % rows;
        for (Eigen::Index n = half; n < cols; ++n) {
            grid(k, n) = std::conj(stage(mirror_k, cols - n));
        }
    }
    return grid;
}

std::vector<cd> circular_xcorr(std::span<const cd> u, std::span<const cd> z) {
    if (u.size() != z.size()) {
        throw std::invalid_argument("circular_xcorr needs equal lengths");
    }
    const std::size_t n = u.size();
    std::vector<cd> uf(u.begin(), u.end());
    std::vector<cd> zf(z.begin(), z.end());
    transform(uf, Direction::forward);
    transform(zf, Direction::forward);
    simd::mul_conj(uf, zf, uf);
    transform(uf, Direction::backward);
    const double scale = 1.0 / static_cast<double>(n);
    for (cd& v : uf) {
        v *= scale;
    }
    return uf;
}

}  // namespace pvn::fft
