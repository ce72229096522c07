#include "novikov/scan.hpp"

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "novikov/errors.hpp"
#include "novikov/jsonl.hpp"

namespace novikov {

const char* const kToolVersion = "0.1.0";

namespace {

struct TaskTable {
  std::vector<IVec3> unique_h;               // first-occurrence order
  std::vector<std::size_t> cell_task;        // grid cell -> task index
};

TaskTable build_tasks(const std::vector<GridDirection>& grid) {
  TaskTable t;
  std::map<IVec3, std::size_t> seen;
  t.cell_task.reserve(grid.size());
  for (const auto& g : grid) {
    auto it = seen.find(g.h);
    if (it == seen.end()) {
      it = seen.emplace(g.h, t.unique_h.size()).first;
      t.unique_h.push_back(g.h);
    }
    t.cell_task.push_back(it->second);
  }
  return t;
}

}  // namespace

ScanResult scan(const DispersionRelation& f, double energy, std::int64_t N,
                const SimOptions& opts, int workers, const std::string& out_path, bool resume,
                ProgressFn progress) {
  if (N < 1) throw PreconditionViolation("scan: N must be >= 1");
  if (workers < 1) throw PreconditionViolation("scan: worker count must be >= 1");

  ScanResult result;
  result.header.surface = f.name();
  result.header.energy = energy;
  result.header.N = N;
  result.header.opts = opts;
  result.header.tool_version = kToolVersion;

  // Scans keep no orbit samples in the merged records.
  SimOptions run_opts = opts;
  run_opts.keep_samples = false;

  const auto grid = enumerate_grid(N);
  TaskTable tasks = build_tasks(grid);

  std::vector<DirectionRecord> task_result(tasks.unique_h.size());
  std::vector<char> task_done(tasks.unique_h.size(), 0);

  // Resume: trust complete records of a matching partial file.
  std::size_t resume_cells = 0;
  if (resume && !out_path.empty()) {
    PartialScan partial = read_scan_file_partial(out_path);
    if (partial.has_header) {
      if (header_line(partial.header) != header_line(result.header))
        throw Error("resume: existing scan file has a different configuration");
      for (std::size_t i = 0; i < partial.records.size() && i < grid.size(); ++i) {
        const auto& rec = partial.records[i];
        if (rec.m != grid[i].m || rec.n != grid[i].n) break;
        const std::size_t t = tasks.cell_task[i];
        if (!task_done[t]) {
          task_result[t] = rec;
          task_done[t] = 1;
        }
        resume_cells = i + 1;
      }
    }
  }

  // Work queue over distinct primitive directions not covered by the resume.
  std::vector<std::size_t> todo;
  for (std::size_t t = 0; t < tasks.unique_h.size(); ++t)
    if (!task_done[t]) todo.push_back(t);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::condition_variable cv;
  std::vector<char> completed(tasks.unique_h.size(), 0);
  for (std::size_t t = 0; t < tasks.unique_h.size(); ++t) completed[t] = task_done[t];

  auto worker_loop = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      const std::size_t t = todo[i];
      const Direction dir = Direction::from_integer(tasks.unique_h[t]);
      DirectionRecord rec = classify_direction(f, energy, dir, run_opts);
      {
        std::lock_guard<std::mutex> lock(mu);
        task_result[t] = rec;
        completed[t] = 1;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  const int nthreads = std::min<std::size_t>(workers, std::max<std::size_t>(1, todo.size()));
  pool.reserve(nthreads);
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker_loop);

  // The caller's thread is the writer: emit records in (m,n) order as soon
  // as their task results exist, so a partial file is always a clean prefix.
  std::ofstream out;
  if (!out_path.empty()) {
    out.open(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      next.store(todo.size());
      for (auto& th : pool) th.join();
      throw Error("cannot open '" + out_path + "' for writing");
    }
    out << header_line(result.header) << "\n";
  }

  result.records.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t t = tasks.cell_task[i];
    {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return completed[t] != 0; });
    }
    DirectionRecord rec = task_result[t];
    rec.m = grid[i].m;
    rec.n = grid[i].n;
    rec.N = N;
    result.records.push_back(rec);
    if (out.is_open()) {
      out << record_line(rec) << "\n";
      out.flush();
      if (!out) {
        next.store(todo.size());
        for (auto& th : pool) th.join();
        throw Error("write failure on '" + out_path + "'");
      }
    }
    if (progress) progress(i + 1, grid.size());
  }
  for (auto& th : pool) th.join();
  (void)resume_cells;
  return result;
}

}  // namespace novikov
