pub mod shapes;

pub fn add(a: i32, b: i32) -> i32 {
    a + b
}

pub fn unused_sub(a: i32, b: i32) -> i32 {
    a - b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adds() {
        assert_eq!(add(2, 3), 5);
    }

    #[test]
    fn areas() {
        assert_eq!(shapes::Rect { w: 2, h: 4 }.area(), 8);
    }
}
