use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

/// Runs `work` over `items` on at most `parallelism` threads.
///
/// Results reach `sink` on the calling thread as `(index, result)` in
/// completion order. Returning `false` from `sink` stops new items from
/// starting; items already running still report. Returns the number of items
/// that were started.
pub fn run_bounded<T, R, W, S>(items: &[T], parallelism: usize, work: W, mut sink: S) -> usize
where
    T: Sync,
    R: Send,
    W: Fn(usize, &T) -> R + Sync,
    S: FnMut(usize, R) -> bool,
{
    let workers = parallelism.max(1).min(items.len());
    if workers == 0 {
        return 0;
    }
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let started = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, R)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, stop, started, work) = (&next, &stop, &started, &work);
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                started.fetch_add(1, Ordering::SeqCst);
                let r = work(i, &items[i]);
                if tx.send((i, r)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            if !sink(i, r) {
                stop.store(true, Ordering::SeqCst);
            }
        }
    });
    started.into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_items_reported_once() {
        let items: Vec<u32> = (0..50).collect();
        let mut seen = [0u32; 50];
        let n = run_bounded(&items, 4, |_, &x| x * 2, |i, r| {
            assert_eq!(r, items[i] * 2);
            seen[i] += 1;
            true
        });
        assert_eq!(n, 50);
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn stop_halts_new_work() {
        let items: Vec<u32> = (0..100).collect();
        let mut got = 0;
        let work = |_, _: &u32| std::thread::sleep(std::time::Duration::from_millis(5));
        let n = run_bounded(&items, 1, work, |_, _| {
            got += 1;
            got < 10
        });
        assert!(n < 20, "started {n}");
        assert_eq!(got, n);
    }

    #[test]
    fn empty_input() {
        let items: Vec<u8> = vec![];
        assert_eq!(run_bounded(&items, 3, |_, _| (), |_, _| true), 0);
    }
}
