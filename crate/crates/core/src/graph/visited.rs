use std::cell::RefCell;

/// Epoch-stamped visited marks, reused across searches on one thread so a
/// search never pays for clearing an N-sized buffer.
pub(crate) struct VisitedList {
    marks: Vec<u32>,
    epoch: u32,
}

impl VisitedList {
    const fn new() -> Self {
        Self {
            marks: Vec::new(),
            epoch: 0,
        }
    }

    fn reset(&mut self, capacity: usize) {
        if self.marks.len() < capacity {
            self.marks.resize(capacity, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.fill(0);
            self.epoch = 1;
        }
    }

    /// Marks `id`; returns true if it was not yet marked.
    #[inline]
    pub(crate) fn insert(&mut self, id: usize) -> bool {
        let slot = &mut self.marks[id];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            true
        }
    }
}

thread_local! {
    static VISITED: RefCell<VisitedList> = const { RefCell::new(VisitedList::new()) };
}

/// Runs `f` with a cleared visited list covering ids `0..capacity`.
pub(crate) fn with_visited<T>(capacity: usize, f: impl FnOnce(&mut VisitedList) -> T) -> T {
    VISITED.with(|cell| match cell.try_borrow_mut() {
        Ok(mut list) => {
            list.reset(capacity);
            f(&mut list)
        }
        // re-entrant use (e.g. a custom kernel that searches); fall back
        Err(_) => {
            let mut list = VisitedList::new();
            list.reset(capacity);
            f(&mut list)
        }
    })
}
