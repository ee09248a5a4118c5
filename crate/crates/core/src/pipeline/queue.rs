use std::collections::VecDeque;

/// Default capacity of every node queue.
pub const QUEUE_CAPACITY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overflow {
    /// Reject the incoming item.
    DropNewest,
    /// Evict the head to make room.
    DropOldest,
}

/// Bounded FIFO that counts what it throws away.
#[derive(Debug, Clone)]
pub struct BoundedQueue<T> {
    items: VecDeque<T>,
    capacity: usize,
    policy: Overflow,
    dropped: u64,
}

impl<T> BoundedQueue<T> {
    pub fn new(capacity: usize, policy: Overflow) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        Self { items: VecDeque::with_capacity(capacity), capacity, policy, dropped: 0 }
    }

    /// Returns false when an item (new or old) was discarded.
    pub fn push(&mut self, item: T) -> bool {
        if self.items.len() < self.capacity {
            self.items.push_back(item);
            return true;
        }
        self.dropped += 1;
        if self.policy == Overflow::DropOldest {
            self.items.pop_front();
            self.items.push_back(item);
        }
        false
    }

    pub fn pop(&mut self) -> Option<T> {
        self.items.pop_front()
    }

    pub fn drain(&mut self) -> impl Iterator<Item = T> + '_ {
        self.items.drain(..)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn drop_newest_keeps_head() {
        let mut q = BoundedQueue::new(2, Overflow::DropNewest);
        assert!(q.push(1));
        assert!(q.push(2));
        assert!(!q.push(3));
        assert_eq!(q.drain().collect::<Vec<_>>(), [1, 2]);
        assert_eq!(q.dropped(), 1);
    }

    #[test]
    fn drop_oldest_keeps_tail() {
        let mut q = BoundedQueue::new(2, Overflow::DropOldest);
        for i in 1..=5 {
            q.push(i);
        }
        assert_eq!(q.drain().collect::<Vec<_>>(), [4, 5]);
        assert_eq!(q.dropped(), 3);
    }

    proptest! {
        #[test]
        fn fifo_and_drop_accounting(cap in 1usize..10, n in 0usize..40, oldest in any::<bool>()) {
            let policy = if oldest { Overflow::DropOldest } else { Overflow::DropNewest };
            let mut q = BoundedQueue::new(cap, policy);
            for i in 0..n {
                q.push(i);
            }
            let kept: Vec<_> = q.iter().copied().collect();
            let expected: Vec<_> = if oldest { (n.saturating_sub(cap)..n).collect() } else { (0..n.min(cap)).collect() };
            prop_assert_eq!(kept, expected);
            prop_assert_eq!(q.dropped() as usize, n.saturating_sub(cap));
        }
    }
}
