package shop.web;

import shop.cart.Cart;
import shop.cart.CouponRepository;

/**
 * Checkout page. Shows the cart, the cart total and the coupon code field.
 * When a coupon code is applied the checkout page shows the discount and the
 * new cart total at full price minus discount.
 */
public class CheckoutController {
    private final CouponRepository coupons;
    private String couponCodeField;
    private String cartTotalLabel;

    public CheckoutController(CouponRepository coupons) {
        this.coupons = coupons;
    }

    public String show(Cart cart) {
        return "checkout";
    }

    public String apply(String code) {
        return coupons.find(code) == null ? "unknown" : "ok";
    }
}
