#include "lift/gateway.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lift/error.hpp"

namespace lift {

namespace {

Digest chat_key(const std::string& identity, const PromptPair& p) {
  Hasher h;
  h.field("chat").field(identity).field(p.system).field(p.user);
  return h.finish();
}

Digest embed_key(const std::string& identity, const std::string& text) {
  Hasher h;
  h.field("embed").field(identity).field(text);
  return h.finish();
}

std::optional<Vector> decode_vector(const std::string& bytes) {
  try {
    auto j = nlohmann::json::parse(bytes);
    if (!j.is_array()) return std::nullopt;
    return j.get<Vector>();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool all_finite(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

std::string_view to_string(ErrorKind k) {
  return k == ErrorKind::kPermanent ? "permanent" : "transient";
}

void validate(const ProviderConfig& cfg) {
  if (cfg.max_retries < 0) throw Error("config.provider", "max_retries must be >= 0");
  if (cfg.max_in_flight < 1) throw Error("config.provider", "max_in_flight must be >= 1");
  if (cfg.backoff_base.count() < 0) throw Error("config.provider", "backoff_base must be >= 0");
  if (cfg.backoff_cap < cfg.backoff_base)
    throw Error("config.provider", "backoff_cap must be >= backoff_base");
  if (cfg.request_timeout.count() <= 0)
    throw Error("config.provider", "request_timeout must be positive");
  if (cfg.embed_batch_size < 1) throw Error("config.provider", "embed_batch_size must be >= 1");
}

std::chrono::milliseconds backoff_delay(const ProviderConfig& cfg, int attempt) {
  if (attempt < 1) attempt = 1;
  auto delay = cfg.backoff_base;
  for (int i = 1; i < attempt && delay < cfg.backoff_cap; ++i) delay *= 2;
  return std::min(delay, cfg.backoff_cap);
}

void validate(const EmbeddingMatrix& m) {
  if (m.values.size() != m.rows * m.dims || m.row_ids.size() != m.rows)
    throw Error("embedding.shape", "embedding matrix shape does not match its storage");
  for (double x : m.values)
    if (!std::isfinite(x)) throw Error("embedding.non_finite", "embedding contains a non-finite entry");
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < m.rows; ++i)
    if (!seen.emplace(m.row_ids[i], i).second)
      throw Error("embedding.duplicate_id", "duplicate embedding row id \"" + m.row_ids[i] + "\"");
}

Gateway::Gateway(std::shared_ptr<Provider> provider, ProviderConfig cfg,
                 std::shared_ptr<ResponseCache> cache, Sleeper sleeper)
    : provider_(std::move(provider)),
      cfg_(std::move(cfg)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {
  validate(cfg_);
  in_flight_ = std::make_unique<std::counting_semaphore<>>(cfg_.max_in_flight);
}

template <class T, class Call>
Result<T> Gateway::with_retries(Call&& call) {
  const int max_attempts = cfg_.max_retries + 1;
  for (int attempt = 1;; ++attempt) {
    in_flight_->acquire();
    ++calls_;
    std::optional<Result<T>> r;
    try {
      r.emplace(call());
    } catch (...) {
      in_flight_->release();
      throw;
    }
    in_flight_->release();
    if (r->ok()) return std::move(*r);
    ProviderError err = r->error();
    err.attempts = attempt;
    if (err.kind == ErrorKind::kPermanent || attempt >= max_attempts) {
      if (err.kind == ErrorKind::kTransient && attempt > 1)
        err.message = "retries exhausted after " + std::to_string(attempt) + " attempts: " + err.message;
      return err;
    }
    sleeper_(backoff_delay(cfg_, attempt));
  }
}

Result<std::string> Gateway::chat_complete(const PromptPair& prompt) {
  if (prompt.user.empty()) throw Error("gateway.precondition", "chat prompt has an empty user message");
  const auto identity = provider_->identity();
  const auto key = chat_key(identity, prompt);
  if (auto hit = cache_->get(key)) {
    ++hits_;
    return std::move(*hit);
  }
  auto r = with_retries<std::string>([&] { return provider_->complete(prompt); });
  if (r.ok()) cache_->put(key, r.value(), identity);
  return r;
}

EmbedResult Gateway::embed_batch(std::span<const TextItem> items) {
  if (items.empty()) throw Error("gateway.precondition", "embed_batch needs at least one text");
  for (const auto& it : items)
    if (it.text.empty())
      throw Error("gateway.precondition", "empty embedding text for id \"" + it.id + "\"");

  const auto identity = provider_->identity();
  std::vector<std::optional<Vector>> rows(items.size());
  std::vector<std::optional<ProviderError>> failures(items.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (auto hit = cache_->get(embed_key(identity, items[i].text))) {
      if (auto v = decode_vector(*hit)) {
        ++hits_;
        rows[i] = std::move(*v);
        continue;
      }
    }
    pending.push_back(i);
  }

  auto store = [&](std::size_t i, Vector v) {
    if (!all_finite(v)) {
      failures[i] = ProviderError{ErrorKind::kPermanent, "provider returned a non-finite embedding", 1};
      return;
    }
    cache_->put(embed_key(identity, items[i].text), nlohmann::json(v).dump(), identity);
    rows[i] = std::move(v);
  };

  const std::size_t chunk = static_cast<std::size_t>(cfg_.embed_batch_size);
  const std::size_t n_chunks = (pending.size() + chunk - 1) / chunk;
  for_each_index(n_chunks, [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    const std::size_t end = std::min(pending.size(), begin + chunk);
    std::vector<std::string> texts;
    for (std::size_t p = begin; p < end; ++p) texts.push_back(items[pending[p]].text);
    auto batch = with_retries<std::vector<Vector>>([&] { return provider_->embed(texts); });
    if (batch.ok() && batch.value().size() == texts.size()) {
      for (std::size_t p = begin; p < end; ++p) store(pending[p], std::move(batch.value()[p - begin]));
      return;
    }
    // Batch failed as a whole: isolate the failing items one by one.
    for (std::size_t p = begin; p < end; ++p) {
      const std::size_t i = pending[p];
      std::vector<std::string> one{items[i].text};
      auto single = with_retries<std::vector<Vector>>([&] { return provider_->embed(one); });
      if (!single.ok()) {
        failures[i] = single.error();
      } else if (single.value().size() != 1) {
        failures[i] = ProviderError{ErrorKind::kPermanent, "provider returned wrong embedding count", 1};
      } else {
        store(i, std::move(single.value()[0]));
      }
    }
  });

  EmbedResult out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!rows[i]) continue;
    if (out.matrix.rows == 0) out.matrix.dims = rows[i]->size();
    if (rows[i]->size() != out.matrix.dims || rows[i]->empty()) {
      failures[i] = ProviderError{ErrorKind::kPermanent,
                                  "embedding dimension " + std::to_string(rows[i]->size()) +
                                      " differs from " + std::to_string(out.matrix.dims),
                                  1};
      continue;
    }
    out.matrix.values.insert(out.matrix.values.end(), rows[i]->begin(), rows[i]->end());
    out.matrix.row_ids.push_back(items[i].id);
    ++out.matrix.rows;
  }
  for (std::size_t i = 0; i < items.size(); ++i)
    if (failures[i]) out.errors.push_back({items[i].id, *failures[i]});
  return out;
}

void Gateway::for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(cfg_.max_in_flight));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  auto work = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lift
