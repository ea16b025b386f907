#include "flowlet/scheduler.hpp"

#include <stdexcept>

namespace flowlet {

void SharedTable::put(const std::string &key, std::string bytes, int writer) {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = entries_.find(key);
  if (it != entries_.end() && it->second.writer != writer)
    throw TableError(TableError::Kind::DisjointKeyViolation,
                     "key '" + key + "' already written by another worker");
  entries_[key] = Entry{std::move(bytes), writer};
}

std::optional<std::string> SharedTable::get(const std::string &key) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.bytes;
}

void SharedTable::remove(const std::string &key, int writer) {
  if (writer != kMaster)
    throw TableError(TableError::Kind::RoleViolation,
                     "only the master can remove entries");
  std::lock_guard<std::mutex> lk(mu_);
  entries_.erase(key);
}

void SharedTable::clear(int writer) {
  if (writer != kMaster)
    throw TableError(TableError::Kind::RoleViolation,
                     "only the master can remove entries");
  std::lock_guard<std::mutex> lk(mu_);
  entries_.clear();
}

size_t SharedTable::size() const {
  std::lock_guard<std::mutex> lk(mu_);
  return entries_.size();
}

DependencyDispatcher::DependencyDispatcher(
    const std::map<std::string, std::vector<std::string>> &deps, int bucket_size)
    : bucket_(bucket_size < 1 ? 1 : bucket_size), deps_(deps) {
  for (const auto &[item, ds] : deps) {
    int count = 0;
    for (const auto &d : ds) {
      if (!deps.count(d)) continue; // outside the scheduled set
      count++;
      dependents_[d].push_back(item);
    }
    remaining_[item] = count;
    if (count == 0) ready_.push_back(item);
    pending_++;
  }
}

std::vector<std::string> DependencyDispatcher::next() {
  std::vector<std::string> bucket;
  while (!ready_.empty() && static_cast<int>(bucket.size()) < bucket_) {
    std::string item = std::move(ready_.front());
    ready_.pop_front();
    for (const auto &d : deps_[item])
      if (deps_.count(d) && !completed_.count(d)) violation_ = true;
    dispatched_.insert(item);
    dispatch_log_.push_back(item);
    bucket.push_back(std::move(item));
  }
  return bucket;
}

void DependencyDispatcher::complete(const std::string &item) {
  if (!completed_.insert(item).second) return;
  pending_--;
  auto it = dependents_.find(item);
  if (it == dependents_.end()) return;
  for (const auto &dep : it->second) {
    auto r = remaining_.find(dep);
    if (r != remaining_.end() && --r->second == 0) ready_.push_back(dep);
  }
}

bool DependencyDispatcher::all_done() const { return pending_ == 0; }

void DependencyDispatcher::check_no_deadlock() const {
  if (pending_ > 0 && ready_.empty() && dispatched_.size() == completed_.size())
    throw std::logic_error("scheduler deadlock: dependency cycle was not condensed");
}

} // namespace flowlet
