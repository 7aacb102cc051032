use crossbeam_channel::{Receiver, Select, TryRecvError};

/// Fair merge of several channels. Inputs are polled round-robin so a busy
/// upstream cannot starve a quiet one; each input's order is preserved.
#[derive(Debug)]
pub struct Merge<T> {
    inputs: Vec<Receiver<T>>,
    next: usize,
}

#[derive(Debug, PartialEq, Eq)]
pub enum TryNext<T> {
    Item(T),
    Empty,
    Done,
}

impl<T> Merge<T> {
    pub fn new(inputs: Vec<Receiver<T>>) -> Self {
        Self { inputs, next: 0 }
    }

    /// Open inputs remaining.
    pub fn open_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn try_next(&mut self) -> TryNext<T> {
        let mut scanned = 0;
        while scanned < self.inputs.len() {
            let idx = (self.next + scanned) % self.inputs.len();
            match self.inputs[idx].try_recv() {
                Ok(item) => {
                    self.next = (idx + 1) % self.inputs.len();
                    return TryNext::Item(item);
                }
                Err(TryRecvError::Empty) => scanned += 1,
                Err(TryRecvError::Disconnected) => {
                    self.inputs.remove(idx);
                    if idx < self.next {
                        self.next -= 1;
                    }
                    if self.next >= self.inputs.len() {
                        self.next = 0;
                    }
                }
            }
        }
        if self.inputs.is_empty() {
            TryNext::Done
        } else {
            TryNext::Empty
        }
    }

    /// Block until some input has an item or every input has closed.
    pub fn wait(&self) {
        if self.inputs.is_empty() {
            return;
        }
        let mut select = Select::new();
        for input in &self.inputs {
            select.recv(input);
        }
        select.ready();
    }
}

impl<T> Iterator for Merge<T> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        loop {
            match self.try_next() {
                TryNext::Item(item) => return Some(item),
                TryNext::Done => return None,
                TryNext::Empty => self.wait(),
            }
        }
    }
}

/// Merge statement streams into one.
pub fn combine<T>(streams: Vec<Receiver<T>>) -> Merge<T> {
    Merge::new(streams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crossbeam_channel::{bounded, unbounded};
    use std::thread;

    #[test]
    fn two_streams_keep_their_order() {
        let (a_tx, a_rx) = unbounded();
        let (b_tx, b_rx) = unbounded();
        for i in 0..100 {
            a_tx.send(("a", i)).unwrap();
            b_tx.send(("b", i)).unwrap();
        }
        drop((a_tx, b_tx));
        let out: Vec<_> = combine(vec![a_rx, b_rx]).collect();
        assert_eq!(out.len(), 200);
        for name in ["a", "b"] {
            let seq: Vec<i32> = out.iter().filter(|(n, _)| *n == name).map(|(_, i)| *i).collect();
            assert_eq!(seq, (0..100).collect::<Vec<_>>());
        }
        // Round-robin alternation while both have items.
        assert_eq!(out[0].0, "a");
        assert_eq!(out[1].0, "b");
    }

    #[test]
    fn single_stream_is_identity() {
        let (tx, rx) = unbounded();
        for i in 0..50 {
            tx.send(i).unwrap();
        }
        drop(tx);
        assert_eq!(combine(vec![rx]).collect::<Vec<_>>(), (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn quiet_input_is_not_starved() {
        let (busy_tx, busy_rx) = bounded(16);
        let (quiet_tx, quiet_rx) = bounded(16);
        let producer = thread::spawn(move || {
            for i in 0..10_000u32 {
                if busy_tx.send(i).is_err() {
                    break;
                }
            }
        });
        let mut merge = combine(vec![busy_rx, quiet_rx]);
        for _ in 0..10 {
            merge.next();
        }
        quiet_tx.send(u32::MAX).unwrap();
        // Within one round over the inputs the quiet item must surface.
        let mut position = None;
        for i in 0..4 {
            if merge.next() == Some(u32::MAX) {
                position = Some(i);
                break;
            }
        }
        assert!(position.is_some());
        drop(merge);
        producer.join().unwrap();
    }

    #[test]
    fn empty_merge_is_done() {
        let mut merge: Merge<()> = combine(Vec::new());
        assert_eq!(merge.try_next(), TryNext::Done);
        assert_eq!(merge.next(), None);
    }
}
