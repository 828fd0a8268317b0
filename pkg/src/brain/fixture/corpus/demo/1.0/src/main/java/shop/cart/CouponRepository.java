package shop.cart;

import java.util.HashMap;
import java.util.Map;

/**
 * Coupon repository. Stores coupon codes and the discount of each coupon.
 * A coupon code maps to a discount percentage; an applied coupon is applied
 * once per checkout. Expired coupon codes give no discount and the cart
 * total stays at full price; the discount is subtracted from the cart total.
 */
public class CouponRepository {
    private final Map<String, Coupon> couponsByCode = new HashMap<>();
    private Coupon lastAppliedCoupon;

    public void save(Coupon coupon) {
        couponsByCode.put(coupon.code(), coupon);
    }

    public Coupon find(String code) {
        return couponsByCode.get(code);
    }
}
