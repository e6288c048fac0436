pub fn caller(v: i32) -> i32 {
    helper_that_does_not_exist(v) + 1
}
