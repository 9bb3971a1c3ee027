//! Runtime selection of AVX2 builds for hot loops.

/// Defines `$name` to run `$body` compiled with AVX2 when the CPU has it.
/// The kernels are plain loops; wider vectors roughly halve their runtime.
macro_rules! multiversion {
    ($name:ident ($($arg:ident: $ty:ty),*) $(-> $ret:ty)? => $body:expr) => {
        fn $name($($arg: $ty),*) $(-> $ret)? {
            #[cfg(target_arch = "x86_64")]
            {
                #[target_feature(enable = "avx2,fma")]
                unsafe fn wide($($arg: $ty),*) $(-> $ret)? {
                    $body
                }
                if std::arch::is_x86_feature_detected!("avx2")
                    && std::arch::is_x86_feature_detected!("fma")
                {
                    // SAFETY: the required features were detected above.
                    return unsafe { wide($($arg),*) };
                }
            }
            $body
        }
    };
}

pub(crate) use multiversion;
