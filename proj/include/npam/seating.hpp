#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace npam {

// Opaque handle to a live structure. Slots are recycled after a structure is
// removed; the structure's `serial` is the never-reused identity used for
// canonical ordering and debugging.
template <class Tag>
struct Handle {
  std::uint32_t slot = 0;
  friend bool operator==(Handle, Handle) = default;
};

using EntrywayId = Handle<struct EntrywayTag>;
using CategoryId = Handle<struct CategoryTag>;
using TableId = Handle<struct TableTag>;
using MenuId = Handle<struct MenuTag>;
using DishId = Handle<struct DishTag>;

// Either an existing structure or a request to open a new one.
template <class H>
struct Choice {
  std::optional<H> existing;

  static Choice fresh() { return {}; }
  static Choice of(H h) { return {h}; }
  bool is_new() const { return !existing.has_value(); }
  H id() const { return *existing; }
  friend bool operator==(const Choice&, const Choice&) = default;
};

struct FullPath {
  Choice<EntrywayId> entryway;
  Choice<CategoryId> category;
  Choice<TableId> table;
  Choice<MenuId> menu;
  Choice<DishId> dish;

  static FullPath all_new() { return {}; }
  friend bool operator==(const FullPath&, const FullPath&) = default;
};

struct TokenRef {
  std::uint32_t doc = 0;
  std::uint32_t pos = 0;
};

// Where a seated customer sits, one handle per level.
struct Seat {
  EntrywayId entryway;
  CategoryId category;
  TableId table;
  MenuId menu;
  DishId dish;
};

struct Discrepancy {
  std::string family;  // e.g. "C(j,k)", "C(m,x)"
  std::string detail;
};

struct AuditReport {
  std::vector<Discrepancy> discrepancies;
  bool clean() const { return discrepancies.empty(); }
  bool mentions(const std::string& family) const;
};

namespace detail {

// Slot storage with LIFO recycling. Released items keep their allocations
// (dish word-count vectors are reused zeroed).
template <class T>
class SlotPool {
 public:
  std::uint32_t acquire() {
    if (!free_.empty()) {
      const auto slot = free_.back();
      free_.pop_back();
      alive_[slot] = true;
      return slot;
    }
    items_.emplace_back();
    alive_.push_back(true);
    return static_cast<std::uint32_t>(items_.size() - 1);
  }
  void release(std::uint32_t slot) {
    alive_[slot] = false;
    free_.push_back(slot);
  }
  T& operator[](std::uint32_t slot) { return items_[slot]; }
  const T& operator[](std::uint32_t slot) const { return items_[slot]; }
  bool alive(std::uint32_t slot) const { return slot < alive_.size() && alive_[slot]; }
  std::uint32_t capacity() const { return static_cast<std::uint32_t>(items_.size()); }

 private:
  std::vector<T> items_;
  std::vector<bool> alive_;
  std::vector<std::uint32_t> free_;
};

}  // namespace detail

// Complete latent state of the five-level restaurant process: per-document
// entryways and tables, global categories, category-local menus, global
// dishes, every count family and the per-token seating record.
class SeatingState {
 public:
  struct Entryway {
    std::uint32_t doc = 0;
    CategoryId category;
    std::uint32_t customers = 0;  // C(j,k)
    std::uint64_t serial = 0;
  };
  struct Category {
    std::uint32_t entryways = 0;  // sum_j' C(l,j')
    std::uint32_t tables = 0;     // sum_j' sum_p C(j',l,p)
    std::uint32_t customers = 0;
    std::vector<MenuId> menus;  // serial order
    std::uint64_t serial = 0;
  };
  struct Table {
    std::uint32_t doc = 0;
    CategoryId category;
    MenuId menu;
    std::uint32_t customers = 0;  // C(j,l,n)
    std::uint64_t serial = 0;
  };
  struct Menu {
    CategoryId category;
    DishId dish;
    std::uint32_t tables = 0;  // sum_j' C(j',l,p)
    std::uint64_t serial = 0;
  };
  struct Dish {
    std::uint32_t menus = 0;      // sum_l' C(l',m)
    std::uint32_t customers = 0;  // sum_x C(m,x)
    std::vector<std::uint32_t> word_counts;  // C(m,x), length V
    std::uint64_t serial = 0;
  };
  // Customers of one restaurant that entered through category l.
  struct Section {
    CategoryId category;
    std::uint32_t entryways = 0;  // C(l,j)
    std::uint32_t customers = 0;
    std::vector<TableId> tables;  // serial order
  };
  struct Restaurant {
    std::uint32_t customers = 0;
    std::vector<EntrywayId> entryways;  // serial order
    std::vector<Section> sections;
  };

  SeatingState() = default;
  SeatingState(const std::vector<std::uint32_t>& doc_lengths, std::uint32_t vocab_size);

  // Throws StateError if the token is already seated, PathError if the path
  // violates the consistency rules of FullPath. Returns the resulting seat.
  Seat seat(TokenRef token, std::uint32_t word, const FullPath& path);
  // Exact inverse of seat(); empty structures are removed immediately,
  // cascading table -> menu -> dish and entryway -> category.
  std::uint32_t unseat(TokenRef token);

  bool is_seated(TokenRef token) const;
  const Seat& seat_of(TokenRef token) const;
  std::uint32_t word_of(TokenRef token) const;

  std::uint32_t num_documents() const { return static_cast<std::uint32_t>(restaurants_.size()); }
  std::uint32_t document_length(std::uint32_t doc) const { return static_cast<std::uint32_t>(tokens_[doc].size()); }
  std::uint32_t vocab_size() const { return vocab_size_; }

  const Restaurant& restaurant(std::uint32_t doc) const { return restaurants_[doc]; }
  const Section* find_section(std::uint32_t doc, CategoryId category) const;
  const Entryway& entryway(EntrywayId id) const { return entryways_[id.slot]; }
  const Category& category(CategoryId id) const { return categories_[id.slot]; }
  const Table& table(TableId id) const { return tables_[id.slot]; }
  const Menu& menu(MenuId id) const { return menus_[id.slot]; }
  const Dish& dish(DishId id) const { return dishes_[id.slot]; }

  bool alive(EntrywayId id) const { return entryways_.alive(id.slot); }
  bool alive(CategoryId id) const { return categories_.alive(id.slot); }
  bool alive(TableId id) const { return tables_.alive(id.slot); }
  bool alive(MenuId id) const { return menus_.alive(id.slot); }
  bool alive(DishId id) const { return dishes_.alive(id.slot); }

  const std::vector<CategoryId>& categories() const { return live_categories_; }
  const std::vector<DishId>& dishes() const { return live_dishes_; }

  // Upper bounds on slot indices, for scratch arrays indexed by handle.
  std::uint32_t category_capacity() const { return categories_.capacity(); }
  std::uint32_t dish_capacity() const { return dishes_.capacity(); }
  std::uint32_t menu_capacity() const { return menus_.capacity(); }

  std::uint64_t total_customers() const { return total_customers_; }
  std::uint64_t total_entryways() const { return total_entryways_; }
  std::uint64_t total_tables() const { return total_tables_; }
  std::uint64_t total_menus() const { return total_menus_; }

 private:
  struct TokenRecord {
    bool seated = false;
    std::uint32_t word = 0;
    Seat seat;
  };

  void check_token(TokenRef token) const;
  void validate_path(std::uint32_t doc, const FullPath& path) const;
  Section& section_for(std::uint32_t doc, CategoryId category);
  std::uint64_t next_serial() { return serial_counter_++; }

  std::uint32_t vocab_size_ = 0;
  std::vector<Restaurant> restaurants_;
  std::vector<std::vector<TokenRecord>> tokens_;

  detail::SlotPool<Entryway> entryways_;
  detail::SlotPool<Category> categories_;
  detail::SlotPool<Table> tables_;
  detail::SlotPool<Menu> menus_;
  detail::SlotPool<Dish> dishes_;
  std::vector<CategoryId> live_categories_;
  std::vector<DishId> live_dishes_;

  std::uint64_t serial_counter_ = 0;
  std::uint64_t total_customers_ = 0;
  std::uint64_t total_entryways_ = 0;
  std::uint64_t total_tables_ = 0;
  std::uint64_t total_menus_ = 0;

  friend AuditReport audit_counts(const SeatingState& state);
  friend struct SeatingStateTestPeer;
};

// Recomputes every count family from the per-token seating records and
// reports each stored value that disagrees, plus any retained empty
// structure. An empty report means the state is consistent.
AuditReport audit_counts(const SeatingState& state);

}  // namespace npam
