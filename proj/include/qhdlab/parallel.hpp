#pragma once

// Minimal persistent worker pool for data-parallel loops. The pool is
// process-global; size it once at startup (the CLI wires --threads here).
// parallel_for falls back to the caller thread for small ranges.

#include <atomic>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qhdlab {

class WorkerPool {
  public:
    static WorkerPool& instance() {
        static WorkerPool pool;
        return pool;
    }

    void set_threads(int n) {
        std::scoped_lock lock(config_mu_);
        shutdown_workers();
        threads_ = std::max(1, n);
        if (threads_ > 1) spawn_workers(threads_ - 1);
    }
    int threads() const { return threads_; }

    // Runs fn(begin..end) split across the pool; blocks until done.
    void run(int begin, int end, const std::function<void(int, int)>& fn) {
        const int n = end - begin;
        if (n <= 0) return;
        if (threads_ <= 1 || n < 2 * grain_) {
            fn(begin, end);
            return;
        }
        std::scoped_lock lock(config_mu_);
        const int parts = std::min(threads_, (n + grain_ - 1) / grain_);
        {
            std::scoped_lock jl(job_mu_);
            job_fn_ = &fn;
            job_begin_ = begin;
            job_end_ = end;
            job_parts_ = parts;
            job_next_ = 0;
            job_done_ = 0;
            ++job_id_;
        }
        job_cv_.notify_all();
        work_one();  // caller participates
        std::unique_lock ul(job_mu_);
        done_cv_.wait(ul, [&] { return job_done_ >= job_parts_; });
        job_fn_ = nullptr;
    }

    ~WorkerPool() { shutdown_workers(); }

  private:
    WorkerPool() {
        threads_ = 1;
        unsigned hw = std::thread::hardware_concurrency();
        if (hw > 1) {
            threads_ = int(std::min(hw, 4u));
            spawn_workers(threads_ - 1);
        }
    }

    void spawn_workers(int n) {
        stop_ = false;
        for (int i = 0; i < n; ++i)
            workers_.emplace_back([this] {
                std::uint64_t seen = 0;
                for (;;) {
                    {
                        std::unique_lock ul(job_mu_);
                        job_cv_.wait(ul, [&] { return stop_ || (job_fn_ && job_id_ != seen); });
                        if (stop_) return;
                        seen = job_id_;
                    }
                    work_one();
                }
            });
    }
    void shutdown_workers() {
        {
            std::scoped_lock lock(job_mu_);
            stop_ = true;
        }
        job_cv_.notify_all();
        for (auto& w : workers_) w.join();
        workers_.clear();
        stop_ = false;
    }
    void work_one() {
        for (;;) {
            int part;
            const std::function<void(int, int)>* fn;
            int b, e, parts;
            {
                std::scoped_lock lock(job_mu_);
                if (!job_fn_ || job_next_ >= job_parts_) return;
                part = job_next_++;
                fn = job_fn_;
                b = job_begin_;
                e = job_end_;
                parts = job_parts_;
            }
            const int n = e - b;
            int lo = b + int(std::int64_t(n) * part / parts);
            int hi = b + int(std::int64_t(n) * (part + 1) / parts);
            (*fn)(lo, hi);
            {
                std::scoped_lock lock(job_mu_);
                ++job_done_;
            }
            done_cv_.notify_all();
        }
    }

    static constexpr int grain_ = 16;
    int threads_ = 1;
    std::vector<std::thread> workers_;
    std::mutex config_mu_;
    std::mutex job_mu_;
    std::condition_variable job_cv_, done_cv_;
    bool stop_ = false;
    const std::function<void(int, int)>* job_fn_ = nullptr;
    int job_begin_ = 0, job_end_ = 0, job_parts_ = 0, job_next_ = 0, job_done_ = 0;
    std::uint64_t job_id_ = 0;
};

inline void parallel_for(int begin, int end, const std::function<void(int, int)>& fn) {
    WorkerPool::instance().run(begin, end, fn);
}

}  // namespace qhdlab
