package shop.cart;

import java.math.BigDecimal;

public class Coupon {
    private final String code;
    private final BigDecimal rate;

    public Coupon(String code, BigDecimal rate) {
        this.code = code;
        this.rate = rate;
    }

    public String code() {
        return code;
    }

    public BigDecimal discountFor(BigDecimal amount) {
        return amount.multiply(rate);
    }
}
