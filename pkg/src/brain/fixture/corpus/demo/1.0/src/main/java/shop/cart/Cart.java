package shop.cart;

import java.math.BigDecimal;
import java.util.ArrayList;
import java.util.List;

/**
 * Shopping cart. Holds line items; the cart total is the full price of all
 * items. Coupon and discount handling happen at checkout, not in the cart:
 * the cart total ignores any coupon code and any discount.
 */
public class Cart {
    private final List<LineItem> items = new ArrayList<>();
    private BigDecimal cachedTotal;

    public void add(LineItem item) {
        items.add(item);
    }

    public BigDecimal subtotal() {
        BigDecimal sum = BigDecimal.ZERO;
        for (LineItem item : items) {
            sum = sum.add(item.price());
        }
        return sum;
    }

    public record LineItem(String sku, BigDecimal price) {
    }
}
