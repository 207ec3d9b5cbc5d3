use rsdict::enumcode::{binomial, code_len, enum_decode, enum_encode};

#[test]
fn bijection_for_short_blocks() {
    for t in 1..=16usize {
        let mut seen: Vec<Vec<bool>> = (0..=t)
            .map(|u| vec![false; binomial(t, u) as usize])
            .collect();
        for block in 0u64..1 << t {
            let u = block.count_ones() as usize;
            let code = enum_encode(block, t, u).unwrap();
            assert!(code < binomial(t, u));
            assert!(code < 1 << code_len(t, u));
            assert!(!seen[u][code as usize], "t={t} code {code} reused");
            seen[u][code as usize] = true;
            assert_eq!(enum_decode(code, t, u).unwrap(), block);
        }
        assert!(seen.iter().flatten().all(|&s| s), "t={t} not onto");
    }
}

#[test]
fn lexicographic_order_of_positions() {
    // blocks with two ones among four bits, ordered by their position tuples
    let order: Vec<u64> = (0..6).map(|c| enum_decode(c, 4, 2).unwrap()).collect();
    assert_eq!(order, vec![0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100]);
}
