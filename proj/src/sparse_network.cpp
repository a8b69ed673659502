#include "snet/sparse_network.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>

namespace snet {

namespace {

constexpr std::size_t kEntryBytes = sizeof(SparseKey) + sizeof(cplx);

std::uint64_t mix(SparseKey k) {
  std::uint64_t x = static_cast<std::uint64_t>(k) ^ (static_cast<std::uint64_t>(k >> 64) * 0x9e3779b97f4a7c15ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Open addressing accumulator, linear probing.
class Accumulator {
 public:
  explicit Accumulator(std::size_t expect, std::size_t budget) : budget_(budget) {
    std::size_t cap = 16;
    while (cap < 2 * expect) cap <<= 1;
    reserve(cap);
  }
  void add(SparseKey k, cplx v) {
    if (2 * (count_ + 1) > cap_) reserve(cap_ * 2);
    std::size_t h = mix(k) & (cap_ - 1);
    while (used_[h] && keys_[h] != k) h = (h + 1) & (cap_ - 1);
    if (!used_[h]) {
      used_[h] = 1;
      keys_[h] = k;
      vals_[h] = v;
      ++count_;
    } else {
      vals_[h] += v;
    }
  }
  std::size_t bytes() const { return cap_ * (kEntryBytes + 1); }
  void drain(SparseFactor& f) {
    f.keys.clear();
    f.vals.clear();
    f.keys.reserve(count_);
    f.vals.reserve(count_);
    for (std::size_t h = 0; h < cap_; ++h)
      if (used_[h] && vals_[h] != 0.0) {
        f.keys.push_back(keys_[h]);
        f.vals.push_back(vals_[h]);
      }
    std::vector<SparseKey>().swap(keys_);
    std::vector<cplx>().swap(vals_);
    std::vector<std::uint8_t>().swap(used_);
  }

 private:
  void reserve(std::size_t cap) {
    if (budget_ && cap * (kEntryBytes + 1) > budget_)
      throw ResourceLimit("sparse contraction exceeds the memory limit (" + std::to_string(budget_ >> 20) + " MiB)");
    std::vector<SparseKey> ok;
    std::vector<cplx> ov;
    std::vector<std::uint8_t> ou;
    ok.swap(keys_);
    ov.swap(vals_);
    ou.swap(used_);
    keys_.assign(cap, 0);
    vals_.assign(cap, 0.0);
    used_.assign(cap, 0);
    cap_ = cap;
    count_ = 0;
    for (std::size_t h = 0; h < ou.size(); ++h)
      if (ou[h]) add(ok[h], ov[h]);
  }
  std::size_t budget_;
  std::size_t cap_ = 0, count_ = 0;
  std::vector<SparseKey> keys_;
  std::vector<cplx> vals_;
  std::vector<std::uint8_t> used_;
};

struct Layout {
  std::vector<int> shift;
  std::vector<int> bits;
  std::vector<SparseKey> mask;
};

class Engine {
 public:
  Engine(const std::vector<int>& dims, const std::vector<int>& outputs, std::size_t limit)
      : limit_(limit), is_output_(dims.size(), false) {
    bits_.resize(dims.size());
    for (std::size_t v = 0; v < dims.size(); ++v) {
      int b = 1;
      while ((1 << b) < dims[v]) ++b;
      bits_[v] = b;
    }
    for (int o : outputs) is_output_.at(o) = true;
  }

  Layout layout(const std::vector<int>& vars) const {
    Layout l;
    int s = 0;
    for (int v : vars) {
      l.shift.push_back(s);
      l.bits.push_back(bits_[v]);
      l.mask.push_back((static_cast<SparseKey>(1) << bits_[v]) - 1);
      s += bits_[v];
    }
    if (s > 128) throw ResourceLimit("sparse factor with more than 128 key bits");
    return l;
  }

  std::size_t limit_;
  std::vector<int> bits_;
  std::vector<bool> is_output_;
};

// Sum out vars of f that are not kept.
SparseFactor marginalize(const Engine& eng, const SparseFactor& f, const std::vector<bool>& keep) {
  SparseFactor r;
  std::vector<int> pos;
  for (std::size_t j = 0; j < f.vars.size(); ++j)
    if (keep[j]) {
      r.vars.push_back(f.vars[j]);
      pos.push_back(static_cast<int>(j));
    }
  if (r.vars.size() == f.vars.size()) return f;
  Layout lf = eng.layout(f.vars), lr = eng.layout(r.vars);
  Accumulator acc(f.size(), eng.limit_);
  for (std::size_t e = 0; e < f.size(); ++e) {
    SparseKey k = 0;
    for (std::size_t j = 0; j < pos.size(); ++j)
      k |= ((f.keys[e] >> lf.shift[pos[j]]) & lf.mask[pos[j]]) << lr.shift[j];
    acc.add(k, f.vals[e]);
  }
  acc.drain(r);
  return r;
}

SparseKey subkey(SparseKey k, const Layout& l, const std::vector<int>& pos) {
  SparseKey s = 0;
  int sh = 0;
  for (int p : pos) {
    s |= ((k >> l.shift[p]) & l.mask[p]) << sh;
    sh += l.bits[p];
  }
  return s;
}

}  // namespace

int SparseNetwork::add_var(int dim) {
  if (dim < 1) throw TensorError("variable dimension must be positive");
  dims_.push_back(dim);
  return static_cast<int>(dims_.size()) - 1;
}

void SparseNetwork::add_factor(SparseFactor f) {
  for (int v : f.vars)
    if (v < 0 || v >= num_vars()) throw TensorError("factor refers to an unknown variable");
  factors_.push_back(std::move(f));
}

void SparseNetwork::add_function(const std::vector<int>& vars, const std::function<cplx(const std::vector<int>&)>& fn) {
  // A variable listed twice takes the diagonal.
  SparseFactor f;
  std::vector<int> slot;
  for (int v : vars) {
    if (v < 0 || v >= num_vars()) throw TensorError("factor refers to an unknown variable");
    auto it = std::find(f.vars.begin(), f.vars.end(), v);
    slot.push_back(static_cast<int>(it - f.vars.begin()));
    if (it == f.vars.end()) f.vars.push_back(v);
  }
  std::vector<int> shift;
  int s = 0;
  for (int v : f.vars) {
    shift.push_back(s);
    int b = 1;
    while ((1 << b) < dims_[v]) ++b;
    s += b;
  }
  std::vector<int> idx(f.vars.size(), 0), full(vars.size());
  while (true) {
    for (std::size_t j = 0; j < vars.size(); ++j) full[j] = idx[slot[j]];
    cplx x = fn(full);
    if (x != 0.0) {
      SparseKey k = 0;
      for (std::size_t j = 0; j < idx.size(); ++j) k |= static_cast<SparseKey>(idx[j]) << shift[j];
      f.keys.push_back(k);
      f.vals.push_back(x);
    }
    int j = static_cast<int>(idx.size()) - 1;
    while (j >= 0 && ++idx[j] == dims_[f.vars[j]]) idx[j--] = 0;
    if (j < 0) break;
  }
  factors_.push_back(std::move(f));
}

void SparseNetwork::add_dense(const std::vector<int>& vars, const std::vector<cplx>& values) {
  std::vector<std::int64_t> stride(vars.size(), 1);
  for (int j = static_cast<int>(vars.size()) - 2; j >= 0; --j) stride[j] = stride[j + 1] * dims_.at(vars[j + 1]);
  add_function(vars, [&](const std::vector<int>& idx) {
    std::int64_t off = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) off += idx[j] * stride[j];
    return values.at(off);
  });
}

DenseTensor SparseNetwork::contract(const std::vector<int>& outputs, std::size_t mem_limit, ContractStats* stats) const {
  Engine eng(dims_, outputs, mem_limit);
  ContractStats st;
  std::vector<SparseFactor> fs = factors_;
  std::vector<bool> alive(fs.size(), true);
  std::vector<std::vector<int>> where(dims_.size());
  auto live_bytes = [&]() {
    std::size_t b = 0;
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (alive[i]) b += fs[i].size() * kEntryBytes;
    return b;
  };
  auto occurrences = [&](int v) {
    int c = 0;
    for (int i : where[v]) c += alive[i] ? 1 : 0;
    return c;
  };
  auto reduce = [&](std::size_t i) {
    std::vector<bool> keep(fs[i].vars.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
      const int v = fs[i].vars[j];
      keep[j] = eng.is_output_[v] || occurrences(v) > 1;
    }
    fs[i] = marginalize(eng, fs[i], keep);
  };
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (int v : fs[i].vars) where[v].push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < fs.size(); ++i) reduce(i);

  // Join count of a and b (matched entry pairs), exact.
  auto join_count = [&](const SparseFactor& a, const SparseFactor& b) -> double {
    std::vector<int> pa, pb;
    for (std::size_t x = 0; x < a.vars.size(); ++x)
      for (std::size_t y = 0; y < b.vars.size(); ++y)
        if (a.vars[x] == b.vars[y]) {
          pa.push_back(static_cast<int>(x));
          pb.push_back(static_cast<int>(y));
        }
    if (pa.empty()) return static_cast<double>(a.size()) * b.size();
    Layout la = eng.layout(a.vars), lb = eng.layout(b.vars);
    const SparseFactor& s = a.size() < b.size() ? a : b;
    const SparseFactor& g = a.size() < b.size() ? b : a;
    const Layout& ls = a.size() < b.size() ? la : lb;
    const Layout& lg = a.size() < b.size() ? lb : la;
    const auto& ps = a.size() < b.size() ? pa : pb;
    const auto& pg = a.size() < b.size() ? pb : pa;
    std::vector<SparseKey> sk(s.size());
    for (std::size_t e = 0; e < s.size(); ++e) sk[e] = subkey(s.keys[e], ls, ps);
    std::sort(sk.begin(), sk.end());
    double tot = 0;
    for (std::size_t e = 0; e < g.size(); ++e) {
      auto r = std::equal_range(sk.begin(), sk.end(), subkey(g.keys[e], lg, pg));
      tot += static_cast<double>(r.second - r.first);
    }
    return tot;
  };

  auto join = [&](std::size_t ia, std::size_t ib) {
    const SparseFactor& a = fs[ia];
    const SparseFactor& b = fs[ib];
    alive[ia] = alive[ib] = false;
    auto kept = [&](int v) { return eng.is_output_[v] || occurrences(v) > 0; };
    SparseFactor r;
    std::vector<int> pa, pb;  // shared positions
    std::vector<std::pair<int, int>> from;  // result var -> (which, pos)
    for (std::size_t x = 0; x < a.vars.size(); ++x) {
      auto it = std::find(b.vars.begin(), b.vars.end(), a.vars[x]);
      if (it != b.vars.end()) {
        pa.push_back(static_cast<int>(x));
        pb.push_back(static_cast<int>(it - b.vars.begin()));
      }
      if (kept(a.vars[x])) {
        r.vars.push_back(a.vars[x]);
        from.push_back({0, static_cast<int>(x)});
      }
    }
    for (std::size_t y = 0; y < b.vars.size(); ++y) {
      if (std::find(a.vars.begin(), a.vars.end(), b.vars[y]) != a.vars.end()) continue;
      if (kept(b.vars[y])) {
        r.vars.push_back(b.vars[y]);
        from.push_back({1, static_cast<int>(y)});
      }
    }
    Layout la = eng.layout(a.vars), lb = eng.layout(b.vars), lr = eng.layout(r.vars);
    std::vector<std::pair<SparseKey, std::uint32_t>> idx(b.size());
    for (std::size_t e = 0; e < b.size(); ++e) idx[e] = {subkey(b.keys[e], lb, pb), static_cast<std::uint32_t>(e)};
    std::sort(idx.begin(), idx.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::size_t budget = 0;
    if (eng.limit_) {
      std::size_t used = live_bytes() + (a.size() + b.size()) * kEntryBytes + idx.size() * 32;
      if (used > eng.limit_) throw ResourceLimit("sparse contraction exceeds the memory limit");
      budget = eng.limit_ - used;
      if (budget == 0) throw ResourceLimit("sparse contraction exceeds the memory limit");
    }
    Accumulator acc(std::max(a.size(), b.size()), budget);
    for (std::size_t e = 0; e < a.size(); ++e) {
      const SparseKey ka = a.keys[e];
      auto lo = std::lower_bound(idx.begin(), idx.end(), subkey(ka, la, pa),
                                 [](const auto& x, SparseKey k) { return x.first < k; });
      if (lo == idx.end() || lo->first != subkey(ka, la, pa)) continue;
      SparseKey base = 0;
      for (std::size_t j = 0; j < from.size(); ++j)
        if (from[j].first == 0) base |= ((ka >> la.shift[from[j].second]) & la.mask[from[j].second]) << lr.shift[j];
      const SparseKey want = lo->first;
      for (auto it = lo; it != idx.end() && it->first == want; ++it) {
        const SparseKey kb = b.keys[it->second];
        SparseKey k = base;
        for (std::size_t j = 0; j < from.size(); ++j)
          if (from[j].first == 1) k |= ((kb >> lb.shift[from[j].second]) & lb.mask[from[j].second]) << lr.shift[j];
        acc.add(k, a.vals[e] * b.vals[it->second]);
        st.work += 1;
      }
    }
    acc.drain(r);
    fs.push_back(std::move(r));
    alive.push_back(true);
    const int id = static_cast<int>(fs.size()) - 1;
    for (int v : fs.back().vars) where[v].push_back(id);
    reduce(id);
    st.largest = std::max(st.largest, fs.back().size());
    st.peak_bytes = std::max(st.peak_bytes, live_bytes() + acc.bytes());
    ++st.steps;
    return id;
  };

  using Cand = std::tuple<double, int, int>;
  std::priority_queue<Cand, std::vector<Cand>, std::greater<Cand>> pq;
  auto push_pairs = [&](int i) {
    std::vector<int> seen;
    for (int v : fs[i].vars)
      for (int j : where[v])
        if (j != i && alive[j] && std::find(seen.begin(), seen.end(), j) == seen.end()) {
          seen.push_back(j);
          double c = join_count(fs[i], fs[j]) - static_cast<double>(fs[i].size()) - static_cast<double>(fs[j].size());
          pq.push({c, std::min(i, j), std::max(i, j)});
        }
  };
  for (std::size_t i = 0; i < fs.size(); ++i) push_pairs(static_cast<int>(i));
  while (!pq.empty()) {
    auto [c, i, j] = pq.top();
    pq.pop();
    if (!alive[i] || !alive[j]) continue;
    push_pairs(join(i, j));
  }
  // Disconnected pieces: outer products, smallest first.
  while (true) {
    std::vector<int> live;
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (alive[i]) live.push_back(static_cast<int>(i));
    if (live.size() <= 1) break;
    std::sort(live.begin(), live.end(), [&](int x, int y) { return fs[x].size() < fs[y].size(); });
    join(live[0], live[1]);
  }
  int last = -1;
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (alive[i]) last = static_cast<int>(i);

  std::vector<std::int64_t> shape;
  for (int o : outputs) shape.push_back(dims_[o]);
  DenseTensor out(shape);
  if (last < 0) return out;
  const SparseFactor& f = fs[last];
  Layout lf = eng.layout(f.vars);
  std::vector<int> pos(outputs.size(), -1);
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    auto it = std::find(f.vars.begin(), f.vars.end(), outputs[j]);
    if (it == f.vars.end()) throw TensorError("output variable does not appear in the network");
    pos[j] = static_cast<int>(it - f.vars.begin());
  }
  for (std::size_t e = 0; e < f.size(); ++e) {
    std::int64_t off = 0;
    for (std::size_t j = 0; j < outputs.size(); ++j)
      off = off * dims_[outputs[j]] + static_cast<std::int64_t>((f.keys[e] >> lf.shift[pos[j]]) & lf.mask[pos[j]]);
    out.data()[off] += f.vals[e];
  }
  if (stats) *stats = st;
  return out;
}

}  // namespace snet
